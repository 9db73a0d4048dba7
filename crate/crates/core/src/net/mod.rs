//! Forward-only reference implementation of the network's feature math:
//! dilated convolutions with inference-mode batch norm, ASPP and PSP
//! attention, decoder fusion and the four-map prediction head.

mod attention;
mod conv;
mod decoder;
pub mod pool;
mod tensor;
mod weights;

pub use attention::{
    aspp_attention, attention, global_avg_pool_branch, psp_attention, AsppWeights, AttentionConfig, AttentionOutput,
    AttentionVariant, AttentionWeights, PspWeights,
};
pub use conv::{conv2d, BatchNorm, ConvParams};
pub use decoder::{decoder_fuse, head_forward, DecoderWeights, HeadWeights};
pub use tensor::Tensor;
pub use weights::WeightStore;
