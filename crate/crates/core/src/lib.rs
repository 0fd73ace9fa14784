//! Bootstraps text classifiers from a knowledge-base category graph.
//!
//! A taxonomy is mapped onto graph categories ([`taxonomy`]), pages are
//! labeled by competition-based traversal of the graph ([`labeler`]), and
//! tf-idf centroid and linear SVM models are trained on the resulting weakly
//! labeled corpus ([`classifiers`]) and scored ([`eval`]). [`pipeline`]
//! strings the steps together the way the `wikicat` command does.

pub mod classifiers;
pub mod corpus;
pub mod eval;
pub mod graph;
pub mod labeler;
pub mod pipeline;
pub mod rng;
pub mod snapshot;
pub mod synth;
pub mod taxonomy;
pub mod textproc;
