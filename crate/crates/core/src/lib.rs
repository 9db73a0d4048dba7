//! Post-network pipeline for multi-task iris segmentation and localization.
//!
//! A segmentation network emits four aligned probability maps per eye image:
//! pupil center, iris mask, inner (pupillary) boundary and outer (limbic)
//! boundary. This crate takes those maps and produces fitted inner/outer
//! circles, and provides everything around that step:
//!
//! - [`imaging`]: pixel grids, thresholding, connected components, disk
//!   dilation, minimum enclosing circle, PGM I/O.
//! - [`net`]: forward-only reference math for the attention modules, decoder
//!   fusion and the four-map prediction head.
//! - [`losses`]: focal, binary cross-entropy, class-balanced edge and joint
//!   losses with analytic gradients and a finite-difference checker.
//! - [`localization`]: pupil-center search, edge denoising, boundary range
//!   estimation, polar Viterbi contours and least-squares circle fitting.
//! - [`recognition`]: rubber-sheet normalization, log-Gabor iris codes,
//!   masked Hamming matching, EER and decidability.
//! - [`metrics`]: E1/E2/F1/mIOU, Hausdorff distance, success curves and
//!   aggregate reports.
//! - [`synth`]: seeded synthetic eyes with ground truth and corrupted maps.
//! - [`formats`]: FMAP tensors, JSON annotations and key=value configs.

pub mod error;
pub mod formats;
pub mod imaging;
pub mod localization;
pub mod losses;
pub mod metrics;
pub mod net;
pub mod recognition;
pub mod synth;

pub use error::{Error, Result};
pub use imaging::{BinaryMask, Circle, GrayImage, Point, Region};
pub use localization::{LocalizationParams, LocalizationResult, ProbMapSet};
