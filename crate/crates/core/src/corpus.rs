//! The bundled example models.

use crate::model::ModelError;
use crate::runner::{self, Report, RunOptions};

const MODELS: &[(&str, &str)] = &[
    ("butter", include_str!("../corpus/butter.model")),
    ("murder", include_str!("../corpus/murder.model")),
    ("oswald2", include_str!("../corpus/oswald2.model")),
    ("oswald3", include_str!("../corpus/oswald3.model")),
    ("soft", include_str!("../corpus/soft.model")),
    ("raven", include_str!("../corpus/raven.model")),
    ("coins", include_str!("../corpus/coins.model")),
    ("modusponens", include_str!("../corpus/modusponens.model")),
    ("transitivity", include_str!("../corpus/transitivity.model")),
    ("f1", include_str!("../corpus/f1.model")),
    ("f2", include_str!("../corpus/f2.model")),
    ("f3", include_str!("../corpus/f3.model")),
    ("f4", include_str!("../corpus/f4.model")),
    ("f5", include_str!("../corpus/f5.model")),
    ("f6", include_str!("../corpus/f6.model")),
    ("f7", include_str!("../corpus/f7.model")),
    ("f8", include_str!("../corpus/f8.model")),
    ("f9", include_str!("../corpus/f9.model")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    MODELS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    MODELS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Runs one bundled model. `None` if the name is unknown.
pub fn run(name: &str, opts: &RunOptions) -> Option<Result<Report, ModelError>> {
    source(name).map(|src| runner::run_str(src, opts))
}
