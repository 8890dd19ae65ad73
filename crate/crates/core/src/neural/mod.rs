//! A small float64 GNN stack with explicit backward passes: a GCN scorer that
//! parameterizes the subgraph sampler, and a GIN that reads the sampled subgraphs.

pub mod checkpoint;
mod data;
mod gradcheck;
mod layers;
mod loss;
mod model;
mod optim;
mod params;
mod tensor;
mod train;

pub use data::{cfi_pair_dataset, count_triangles, triangle_dataset, Dataset, Sample, Task};
pub use gradcheck::{rel_err, run_gradchecks, GradcheckRow, STEP as GRADCHECK_STEP, TOLERANCE as GRADCHECK_TOLERANCE};
pub use layers::{
    gcn_normalized_adjacency, inter_mean_pool, masked_mean_pool, relu, Gcn, Gin, Linear, MaskedNorm, ReadoutMlp,
    NORM_EPS,
};
pub use loss::{loss_and_grad, mean_pairwise_cosine, sample_metric, Loss, Target};
pub use model::{
    base_features, edge_gradients, scores_grad, theta_from_scores, Downstream, DownstreamConfig, SubgraphView,
    Upstream, UpstreamConfig,
};
pub use optim::Adam;
pub use params::{Group, Param, ParamId, ParamStore};
pub use tensor::Tensor;
pub use train::{evaluate, train, EpochMetrics, OsanModel, TrainConfig, TrainMode, TrainReport};
