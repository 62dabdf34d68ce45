//! Shared multilingual embedding spaces.
//!
//! Every shared space uses language-prefixed tokens (`eng:dog`, `fra:chien`)
//! so vocabularies of different languages never collide.

mod bicvm;
mod bli;
mod invert;
mod mapping;
mod merge;
mod sgns;
mod shared;

pub use bicvm::{bicvm_pair_objective, train_bicvm, BicvmConfig, BicvmModel, RowGrads};
pub use bli::{nearest_neighbor, precision_at_1};
pub use invert::{build_inverted_index, embed_invert, InvertConfig, InvertedIndex, Weighting};
pub use mapping::{apply_map, fit_translation_matrix, map_to_shared_space, TranslationFit};
pub use merge::{merge_random, merge_ratio, MergeMethod, MergedCorpus};
pub use sgns::{embed_random, embed_ratio, sgns_pair_loss, train_sgns, SgnsConfig, SgnsModel, SgnsPairGrad};
pub use shared::{build_shared_space, EmbedConfig, Method};
