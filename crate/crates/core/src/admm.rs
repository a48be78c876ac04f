//! Linearised preconditioned nonlinear ADMM.
//!
//! With `B` linearised at the current iterate, one step reads
//!
//! ```text
//! v⁺ = v − τ_v·B'(v)*·λ̄
//! p⁺ = prox_{τ_q F}(p + τ_q·(λ + δ(B(v⁺) − p)))
//! λ⁺ = λ + δ(B(v⁺) − p⁺)
//! λ̄⁺ = 2λ⁺ − λ
//! ```

use std::time::Instant;

use log::{debug, warn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{axpy, block_norm, difference, first_non_finite, inner, scale};
use crate::model::{Acquisition, KSpaceData};
use crate::operators::{CoilSplit, Gradient, Linearization, PrimalVariable, SplitVariable, SplittingOperator};
use crate::prox::{prox_coil_gradient, prox_data, prox_l1_coeff, prox_tv, RegularizationParams, Shrinkage};
use crate::ComplexImage;

/// Safety factor applied to power-iteration norm estimates.
pub const NORM_SAFETY: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// Largest step with `τ·δ·(1.1·‖J‖)² ≤ 1`, re-estimated every iteration.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub delta: f64,
    pub tau_v: StepRule,
    pub tau_q: StepRule,
    pub max_iters: usize,
    pub log_every: usize,
    /// Stop early once the primal residual `‖B(v) − p‖` drops below this.
    pub tolerance: Option<f64>,
    /// Power iterations per adaptive step estimate (warm-started).
    pub power_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: 1.0 / 24.0,
            tau_v: StepRule::Fixed(1.0 / 8.0),
            tau_q: StepRule::Fixed(23.0),
            max_iters: 1500,
            log_every: 1,
            tolerance: None,
            power_iters: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if self.log_every == 0 {
            return Err(Error::invalid("log_every must be at least 1"));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::invalid(format!(
                "delta must be finite and non-negative, got {}",
                self.delta
            )));
        }
        for (name, rule) in [("tau_v", self.tau_v), ("tau_q", self.tau_q)] {
            if let StepRule::Fixed(t) = rule {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::invalid(format!("{name} must be positive, got {t}")));
                }
            }
        }
        if matches!(self.tau_q, StepRule::Fixed(t) if t * self.delta >= 1.0) {
            warn!("tau_q·delta ≥ 1: the q-update is not a contraction");
        }
        if self.power_iters == 0 {
            return Err(Error::invalid("power_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Everything the solver needs besides its state.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub operator: SplittingOperator<'a>,
    pub acquisition: &'a Acquisition,
    pub data: &'a KSpaceData,
    pub params: RegularizationParams,
}

impl<'a> Problem<'a> {
    pub fn new(
        operator: SplittingOperator<'a>,
        acquisition: &'a Acquisition,
        data: &'a KSpaceData,
        params: RegularizationParams,
    ) -> Result<Self> {
        params.validate()?;
        if data.coils() != operator.coils() || params.alpha_j.len() != operator.coils() {
            return Err(Error::shape(
                "problem: coil count",
                operator.coils(),
                format!("{} data planes, {} weights", data.coils(), params.alpha_j.len()),
            ));
        }
        if acquisition.size() != operator.size() {
            return Err(Error::shape("problem: image size", operator.size(), acquisition.size()));
        }
        Ok(Problem {
            operator,
            acquisition,
            data,
            params,
        })
    }

    /// `F(q)` for an element of the range of `B`.
    pub fn objective(&self, q: &SplitVariable) -> Result<f64> {
        let params = &self.params;
        let mut total = 0.0;
        for ((qj, gj), aj) in q.data.iter().zip(&self.data.planes).zip(&params.alpha_j) {
            let mut k = self.acquisition.fft().forward(qj)?;
            self.acquisition.mask().apply(&mut k);
            total += 0.5 * aj * block_norm(&difference(&k, gj)).powi(2);
        }
        total += params.alpha0 * field_norm(&q.grad, params.tv_shrinkage);
        total += match &q.coil {
            CoilSplit::Coefficients(a) => params.alpha * a.values().iter().map(|v| v.norm()).sum::<f64>(),
            CoilSplit::Gradients(gs) => {
                params.coil_smoothness * gs.iter().map(|g| field_norm(g, params.coil_shrinkage)).sum::<f64>()
            }
        };
        Ok(total)
    }

    /// Blockwise `prox_{τF}`.
    pub fn prox(&self, x: &SplitVariable, tau: f64) -> Result<SplitVariable> {
        let params = &self.params;
        let data = x
            .data
            .iter()
            .zip(&self.data.planes)
            .zip(&params.alpha_j)
            .map(|((xj, gj), &aj)| prox_data(self.acquisition, xj, gj, aj, tau))
            .collect::<Result<Vec<_>>>()?;
        let coil = match &x.coil {
            CoilSplit::Coefficients(a) => CoilSplit::Coefficients(prox_l1_coeff(a, params.alpha, tau)),
            CoilSplit::Gradients(gs) => CoilSplit::Gradients(
                gs.iter()
                    .map(|g| prox_coil_gradient(g, params.coil_smoothness, tau, params.coil_shrinkage))
                    .collect(),
            ),
        };
        Ok(SplitVariable {
            data,
            grad: prox_tv(&x.grad, params.alpha0, tau, params.tv_shrinkage),
            coil,
        })
    }
}

fn field_norm(p: &Gradient, mode: Shrinkage) -> f64 {
    match mode {
        Shrinkage::Pixelwise => p.magnitude().sum(),
        Shrinkage::Global => block_norm(p),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub v: PrimalVariable,
    pub p: SplitVariable,
    pub lambda: SplitVariable,
    pub lambda_bar: SplitVariable,
    /// Number of completed steps.
    pub k: usize,
}

/// `u⁰ = 0`, unit coil variable, zero split and dual blocks, `λ̄⁰ = λ⁰`.
///
/// The free-map model starts from `c_j⁰ = 1`: with `u⁰ = 0` and `c⁰ = 0`
/// both partial derivatives of `u ⊙ c_j` vanish and the iteration never
/// leaves the origin.
pub fn default_init(operator: &SplittingOperator) -> SolverState {
    let zero = operator.split_zeros();
    SolverState {
        v: operator.primal_filled(Complex64::new(1.0, 0.0)),
        p: zero.clone(),
        lambda: zero.clone(),
        lambda_bar: zero,
        k: 0,
    }
}

/// One logged point of the iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub state: SolverState,
    /// Records at iterations `1, 1 + log_every, 1 + 2·log_every, …`.
    pub history: Vec<HistoryRecord>,
    /// Record after the first step.
    pub first: HistoryRecord,
    /// Record after the last step.
    pub last: HistoryRecord,
}

impl SolveOutput {
    pub fn u(&self) -> &ComplexImage {
        &self.state.v.u
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub tau_v: f64,
    pub tau_q: f64,
    pub primal_residual: f64,
}

/// Owns the step-rule scratch state for one solve.
#[derive(Debug)]
pub struct Solver<'p, 'a> {
    problem: &'p Problem<'a>,
    config: SolverConfig,
    power_vector: Option<PrimalVariable>,
}

impl<'p, 'a> Solver<'p, 'a> {
    pub fn new(problem: &'p Problem<'a>, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        Ok(Solver {
            problem,
            config,
            power_vector: None,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn tau_v(&mut self, lin: &Linearization) -> Result<f64> {
        match self.config.tau_v {
            StepRule::Fixed(t) => Ok(t),
            StepRule::Adaptive => {
                let start = self
                    .power_vector
                    .take()
                    .unwrap_or_else(|| self.problem.operator.random_primal(0x5eed));
                let mut x = start;
                let mut estimate = 0.0;
                for _ in 0..self.config.power_iters {
                    let n = block_norm(&x);
                    if n == 0.0 {
                        break;
                    }
                    scale(&mut x, 1.0 / n);
                    let ax = lin.normal(&x)?;
                    estimate = inner(&x, &ax).max(0.0).sqrt();
                    x = ax;
                }
                self.power_vector = Some(x);
                let bound = self.config.delta * (NORM_SAFETY * estimate).powi(2);
                Ok(if bound > 0.0 { 1.0 / bound } else { 1.0 })
            }
        }
    }

    fn tau_q(&self) -> f64 {
        match self.config.tau_q {
            StepRule::Fixed(t) => t,
            // the q-part of the linearisation is −I, with norm 1
            StepRule::Adaptive => {
                let bound = self.config.delta * NORM_SAFETY * NORM_SAFETY;
                if bound > 0.0 {
                    1.0 / bound
                } else {
                    1.0
                }
            }
        }
    }

    /// Advance `state` by one iteration. Returns the dual residual
    /// `‖δ·B'(v⁺)*(p⁺ − p)‖` as well when `with_dual` is set.
    pub fn step(&mut self, state: &mut SolverState, with_dual: bool) -> Result<(StepInfo, Option<f64>)> {
        let op = &self.problem.operator;
        let delta = self.config.delta;
        let iteration = state.k + 1;

        let lin = op.linearize(&state.v)?;
        let tau_v = self.tau_v(&lin)?;
        let direction = lin.adjoint(&state.lambda_bar)?;
        axpy(&mut state.v, -tau_v, &direction);
        check_finite_primal(&state.v, iteration)?;

        let maps = op.coil_maps(&state.v)?;
        let b = op.apply_with_maps(&state.v, &maps);

        let tau_q = self.tau_q();
        // x = p + τ_q(λ + δ(B − p))
        let mut x = state.p.clone();
        axpy(&mut x, tau_q, &state.lambda);
        let r_old = difference(&b, &state.p);
        axpy(&mut x, tau_q * delta, &r_old);
        let p_new = self.problem.prox(&x, tau_q)?;

        let residual = difference(&b, &p_new);
        let mut lambda_new = state.lambda.clone();
        axpy(&mut lambda_new, delta, &residual);
        let mut lambda_bar = lambda_new.clone();
        scale(&mut lambda_bar, 2.0);
        axpy(&mut lambda_bar, -1.0, &state.lambda);

        let dual = if with_dual {
            let lin_new = op.linearize(&state.v)?;
            let mut dp = difference(&p_new, &state.p);
            scale(&mut dp, delta);
            Some(block_norm(&lin_new.adjoint(&dp)?))
        } else {
            None
        };

        check_finite_split(&p_new, "p", iteration)?;
        check_finite_split(&lambda_new, "lambda", iteration)?;
        state.p = p_new;
        state.lambda = lambda_new;
        state.lambda_bar = lambda_bar;
        state.k = iteration;
        let info = StepInfo {
            tau_v,
            tau_q,
            primal_residual: block_norm(&residual),
        };
        Ok((info, dual))
    }

    /// Run `max_iters` steps (fewer if a tolerance is set and reached).
    pub fn solve(&mut self, init: SolverState) -> Result<SolveOutput> {
        let start = Instant::now();
        let mut state = init;
        let max = self.config.max_iters;
        let every = self.config.log_every;
        let mut history = Vec::with_capacity(max.div_ceil(every));
        let mut first = None;
        let mut last = None;
        for i in 0..max {
            let logged = i % every == 0;
            let is_last = i + 1 == max;
            let need = logged || is_last || i == 0;
            let (info, dual) = self.step(&mut state, need || self.config.tolerance.is_some())?;
            let stop = self.config.tolerance.is_some_and(|tol| info.primal_residual < tol);
            if need || stop {
                let b = self.problem.operator.apply(&state.v)?;
                let dual = dual.expect("dual residual computed on recorded steps");
                let record = HistoryRecord {
                    iteration: state.k,
                    objective: self.problem.objective(&b)?,
                    primal_residual: info.primal_residual,
                    dual_residual: dual,
                    elapsed_seconds: start.elapsed().as_secs_f64(),
                };
                if logged {
                    debug!(
                        "iter {:>5}  obj {:.6e}  primal {:.3e}  dual {:.3e}  tau_v {:.3e}",
                        record.iteration, record.objective, record.primal_residual, record.dual_residual, info.tau_v
                    );
                    history.push(record);
                }
                if i == 0 {
                    first = Some(record);
                }
                last = Some(record);
            }
            if stop {
                break;
            }
        }
        let first = first.expect("at least one iteration runs");
        let last = last.expect("at least one iteration runs");
        Ok(SolveOutput {
            state,
            history,
            first,
            last,
        })
    }
}

fn check_finite_primal(v: &PrimalVariable, iteration: usize) -> Result<()> {
    match first_non_finite(v) {
        Some(i) => Err(Error::NonFinite {
            block: v.block_name(i),
            iteration,
        }),
        None => Ok(()),
    }
}

fn check_finite_split(w: &SplitVariable, name: &str, iteration: usize) -> Result<()> {
    match first_non_finite(w) {
        Some(i) => Err(Error::NonFinite {
            block: format!("{name}.{}", w.block_name(i)),
            iteration,
        }),
        None => Ok(()),
    }
}

/// Convenience wrapper: `default_init` followed by a full solve.
pub fn solve(config: SolverConfig, problem: &Problem, init: Option<SolverState>) -> Result<SolveOutput> {
    let init = init.unwrap_or_else(|| default_init(&problem.operator));
    Solver::new(problem, config)?.solve(init)
}
