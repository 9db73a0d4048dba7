//! On-disk formats: the FMAP float container, JSON annotations and results,
//! key=value configuration files and ITPL iris templates.

pub mod annotation;
pub mod config;
pub mod fmap;
pub mod template;

pub use annotation::{Annotation, ContourRecord, Ellipse, EllipsePair, LocalizationRecord};
pub use config::PipelineConfig;
pub use fmap::Fmap;
