//! JSON/CSV shapes written by the binary.

use graph_frechet::{FitResult, FitStatus, FitTrace, Graph, SbmParams};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ParamsOut {
    pub p: Vec<f64>,
    pub q: f64,
    pub s: Vec<f64>,
    pub n: usize,
}

impl From<&SbmParams> for ParamsOut {
    fn from(p: &SbmParams) -> Self {
        ParamsOut {
            p: p.p.clone(),
            q: p.q,
            s: p.s.clone(),
            n: p.n,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphOut {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
}

impl From<&Graph> for GraphOut {
    fn from(g: &Graph) -> Self {
        GraphOut {
            n: g.n(),
            edges: g.edges().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRowOut {
    pub iteration: usize,
    pub p: Vec<f64>,
    pub q: f64,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step_accepted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResultOut {
    pub params: ParamsOut,
    pub c_star: usize,
    pub final_objective: f64,
    pub rho_bar: f64,
    pub density_clamped: bool,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
    pub fitted_spectrum: Vec<f64>,
    pub representative: GraphOut,
    pub trace: Vec<TraceRowOut>,
    pub timing_seconds: f64,
}

pub fn status_label(status: &FitStatus) -> (String, Option<String>) {
    match status {
        FitStatus::Converged => ("converged".into(), None),
        FitStatus::MaxIterations => ("max_iterations".into(), None),
        FitStatus::Aborted { reason } => ("aborted".into(), Some(reason.clone())),
    }
}

impl FitResultOut {
    pub fn new(fit: &FitResult, timing_seconds: f64) -> Self {
        let (status, abort_reason) = status_label(&fit.status);
        FitResultOut {
            params: (&fit.params).into(),
            c_star: fit.c_star,
            final_objective: fit.final_objective,
            rho_bar: fit.rho_bar,
            density_clamped: fit.density_clamped,
            status,
            abort_reason,
            fitted_spectrum: fit.fitted_spectrum.clone(),
            representative: (&fit.representative).into(),
            trace: fit
                .trace
                .iter()
                .enumerate()
                .map(|(iteration, it)| TraceRowOut {
                    iteration,
                    p: it.p.clone(),
                    q: it.q,
                    objective: it.objective,
                    gradient_norm: it.gradient_norm,
                    step_accepted: it.step_accepted,
                })
                .collect(),
            timing_seconds,
        }
    }
}

pub fn trace_csv(trace: &FitTrace) -> String {
    let mut out = String::from("iteration,objective,gradient_norm,step_accepted\n");
    for (i, row) in trace.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i, row.objective, row.gradient_norm, row.step_accepted
        ));
    }
    out
}

pub fn adjacency_csv(g: &Graph) -> String {
    let n = g.n();
    let mut grid = vec![vec![0u8; n]; n];
    for &(i, j) in g.edges() {
        grid[i as usize][j as usize] = 1;
        grid[j as usize][i as usize] = 1;
    }
    let mut out = String::with_capacity(n * (2 * n + 1));
    for row in grid {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressPointOut {
    pub t: f64,
    pub params: ParamsOut,
    pub fitted_spectrum: Vec<f64>,
    pub final_objective: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
    pub density_clamped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressOut {
    pub pooled_c: usize,
    pub points: Vec<RegressPointOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_sbm: Option<f64>,
    pub timing_seconds: f64,
}
