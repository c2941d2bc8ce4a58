//! Approximating Fréchet means of graph datasets under truncated adjacency
//! spectral pseudometrics by fitting stochastic block models, plus Fréchet
//! regression over time-indexed graph samples.

pub mod community;
pub mod error;
pub mod graph;
pub mod models;
pub mod optimizer;
pub mod regression;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{d_a, d_ac, is_sparse, sparsity_threshold, Graph, Spectrum};
pub use models::{
    expected_adjacency, sample_barabasi_albert, sample_erdos_renyi, sample_sbm,
    sample_small_world, sbm_kernel_eval, KernelGrid, ModelConfig, SbmParams,
};
pub use optimizer::{
    build_s_star, fit_frechet_mean, gradient_estimate, mean_spectrum, objective,
    sample_frechet_statistic, solve_q_for_density, FitConfig, FitResult, FitStatus, FitTrace,
};
pub use regression::{regression_error, regression_error_with_mc, RegressionDataset};
pub use spectral::{
    expected_adjacency_spectrum, expected_sample_spectrum, expected_spectra,
    kernel_spectrum_closeness_check, monte_carlo_mean_spectrum, operator_spectrum,
    weyl_perturbation_bound_check, ExpectedSpectra, MeanSpectrum, RootFindConfig,
};
