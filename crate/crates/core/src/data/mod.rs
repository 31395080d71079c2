//! Dataset construction: the synthetic spiral and categorical tables turned
//! into hypergraphs.

mod categorical;
mod spiral;

pub use categorical::{
    bind_indices, incidence_as_input, load_categorical, load_train_indices, parse_categorical,
    parse_train_indices, table_to_hypergraph, CategoricalTable, ClassColumn, TableFormat,
    MUSHROOM_STALK_ROOT_COLUMN,
};
pub use spiral::{generate_spiral, stratified_train_indices, SpiralConfig};
