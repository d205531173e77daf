//! Image-feature projection heads trained with a hinge ranking loss.
//!
//! A frozen backbone is represented by an [`ImageFeatureStore`]; the head is
//! the replaced last layer, an affine map into the neighborhood space (one
//! output per place) or the word space.

mod head;
mod sampling;
mod split;
mod table;
mod trainer;

pub use head::{loss_gradients, ranking_loss, EmbeddingHead, HeadGradients, TargetKind};
pub use sampling::{
    far_half, sample_far_half, sample_negative_neighctx, sample_negative_w2v, DistanceReference, NegativePolicy,
};
pub use split::{split_dataset, SplitSpec, Splits};
pub use table::{Dataset, ImageFeatureStore, TargetSet, VectorTable};
pub use trainer::{train_from, train_head, validate, CurvePoint, TrainedHead, TrainerConfig};
