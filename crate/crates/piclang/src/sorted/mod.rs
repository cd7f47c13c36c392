//! The sorted normal form for ESO(∀^d, arity d) over coordinate encodings of
//! (d−1)-pictures, with the permutation machinery it rests on.

pub mod coding;
pub mod perm;
mod pipeline;
pub mod simulation;

pub use coding::{code_relation, coding_conditions, decode_family, CodingVerdict, Relation};
pub use perm::{apply_permutation, build_perm_tree, is_alternated, PermNode, PermTree, Permutation, MAX_TREE_D};
pub use pipeline::{
    decompose_successors, eliminate_comparisons, flatten_atoms, fold_relations, simulate_input_relations,
    sort_pipeline, MAX_PIPELINE_D,
};
pub use simulation::{check_simulation, propagate_simulation, Simulation, SimulationReport};
