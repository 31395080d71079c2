use super::DenseMatrix;

/// A symmetric linear map on `dim`-row blocks, applied column-wise.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Applies the map to every column of `x` (which has `dim` rows).
    fn apply(&self, x: &DenseMatrix) -> DenseMatrix;

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let m = DenseMatrix::from_vec(x.len(), 1, x.to_vec()).expect("column vector");
        self.apply(&m).into_vec()
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        self.matmul(x).expect("operator shape")
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        (**self).apply(x)
    }
}

/// Materializes an operator by applying it to the identity.
pub fn assemble(op: &dyn LinearOperator) -> DenseMatrix {
    op.apply(&DenseMatrix::identity(op.dim()))
}

/// `shift·I − op`, the map Lanczos actually iterates on.
pub(crate) struct Shifted<'a> {
    pub op: &'a dyn LinearOperator,
    pub shift: f64,
}

impl LinearOperator for Shifted<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut y = self.op.apply(x).scale(-1.0);
        y.axpy_assign(self.shift, x).expect("same shape");
        y
    }
}
