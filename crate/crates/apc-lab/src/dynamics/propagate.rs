use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::linalg::TriLu;
use crate::radial::{PotentialSpec, RadialGrid, Spinor, SwitchingProfile};
use crate::spectral::{assemble_operator, DiscreteOperator};
use crate::C64;

/// Distance a wave may travel past the well before the box wall must be
/// reached: L ≥ T + R_pot + BOX_MARGIN keeps reflections out of the region.
pub const BOX_MARGIN: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CrankNicolson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub method: Method,
    pub epsilon: f64,
    pub region_radius: f64,
    pub record_stride: usize,
    /// Smooth absorbing mask on the outer 15% of the box.
    pub absorber: bool,
    /// Keep a copy of ψ every this many steps.
    pub snapshot_stride: Option<usize>,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            dt: 0.05,
            method: Method::CrankNicolson,
            epsilon: 1.0 / 128.0,
            region_radius: 0.5,
            record_stride: 1,
            absorber: false,
            snapshot_stride: None,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self, potential: &PotentialSpec) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(invalid(format!("dt must lie in (0, 0.1], got {}", self.dt)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if self.region_radius < potential.radius {
            return Err(invalid(format!(
                "region radius {} is smaller than the well radius {}",
                self.region_radius, potential.radius
            )));
        }
        if self.record_stride == 0 {
            return Err(invalid("record stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Microscopic time since the start of this run.
    pub t: f64,
    /// Macroscopic time s = s_start + ε t.
    pub s: f64,
    pub norm: f64,
    pub region_mass: f64,
    /// |⟨probe, ψ⟩|, NaN without a probe.
    pub crit_overlap: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: Spinor,
    pub snapshots: Vec<(f64, Spinor)>,
    /// Norm² removed by the absorbing mask.
    pub absorbed_norm: f64,
    /// True when the stop predicate ended the run before the final time.
    pub stopped: bool,
}

struct Stepper {
    sub: Vec<C64>,
    half: f64,
    lu: Option<TriLu<C64>>,
    mu: f64,
}

impl Stepper {
    fn new(op: &DiscreteOperator, dt: f64) -> Self {
        let half = 0.5 * dt;
        let sub = op.off_diag().iter().map(|e| C64::new(0.0, half * e)).collect();
        Stepper { sub, half, lu: None, mu: f64::NAN }
    }

    fn prepare(&mut self, op: &DiscreteOperator, mu: f64) -> Result<()> {
        if self.lu.is_some() && mu == self.mu {
            return Ok(());
        }
        let diag: Vec<C64> = op
            .diag()
            .iter()
            .zip(op.well())
            .map(|(&d0, &a)| C64::new(1.0, self.half * (d0 + (mu - op.mu()) * a)))
            .collect();
        self.lu = Some(TriLu::factor(&self.sub, &diag, &self.sub)?);
        self.mu = mu;
        Ok(())
    }

    /// ψ ← (1 + iΔt/2 H)⁻¹(1 − iΔt/2 H)ψ.
    fn step(&self, op: &DiscreteOperator, psi: &mut [C64], scratch: &mut [C64]) {
        let d = op.diag();
        let e = op.off_diag();
        let w = op.well();
        let shift = self.mu - op.mu();
        let n = psi.len();
        let mi = C64::new(0.0, -self.half);
        for i in 0..n {
            let mut hx = psi[i] * (d[i] + shift * w[i]);
            if i > 0 {
                hx += psi[i - 1] * e[i - 1];
            }
            if i + 1 < n {
                hx += psi[i + 1] * e[i];
            }
            scratch[i] = psi[i] + mi * hx;
        }
        self.lu.as_ref().expect("stepper prepared").solve_in_place(scratch);
        psi.copy_from_slice(scratch);
    }
}

fn absorber_mask(grid: &RadialGrid) -> Vec<f64> {
    let l = grid.length();
    let r0 = 0.85 * l;
    (0..grid.dim())
        .map(|i| {
            let r = grid.r(i);
            if r <= r0 {
                1.0
            } else {
                (0.5 * std::f64::consts::PI * ((r - r0) / (l - r0)).min(1.0)).cos().max(0.0).powf(0.125)
            }
        })
        .collect()
}

/// General CN driver. `coupling(t)` gives μ at microscopic time t (it is
/// sampled at step midpoints); `total` may be negative for backward runs.
/// `stop` sees every recorded sample and may end the run.
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    psi0: &Spinor,
    base: &DiscreteOperator,
    coupling: &dyn Fn(f64) -> f64,
    total: f64,
    s_start: f64,
    cfg: &PropagationConfig,
    probe: Option<&Spinor>,
    stop: &mut dyn FnMut(&Sample) -> bool,
) -> Result<Trajectory> {
    if psi0.grid() != base.grid() || psi0.channel() != base.channel() {
        return Err(invalid("initial state and operator live on different lattices"));
    }
    if !total.is_finite() {
        return Err(invalid("propagation time must be finite"));
    }
    let steps = ((total.abs() / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = total / steps as f64;
    let mut stepper = Stepper::new(base, dt);
    let mask = cfg.absorber.then(|| absorber_mask(base.grid()));
    let mut psi = psi0.clone();
    let mut scratch = vec![C64::new(0.0, 0.0); psi.data().len()];
    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut absorbed = 0.0;
    let record = |psi: &Spinor, t: f64| -> Result<Sample> {
        Ok(Sample {
            t,
            s: s_start + cfg.epsilon * t,
            norm: psi.norm(),
            region_mass: super::region_mass(psi, cfg.region_radius.min(psi.grid().length()))?,
            crit_overlap: probe.map_or(f64::NAN, |p| p.inner(psi).norm()),
        })
    };
    let first = record(&psi, 0.0)?;
    samples.push(first);
    if cfg.snapshot_stride.is_some() {
        snapshots.push((0.0, psi.clone()));
    }
    let mut stopped = stop(&first);
    let mut n = 0;
    while !stopped && n < steps {
        let t_mid = (n as f64 + 0.5) * dt;
        stepper.prepare(base, coupling(t_mid))?;
        stepper.step(base, psi.data_mut(), &mut scratch);
        if let Some(m) = &mask {
            let before = psi.norm_sqr();
            psi.data_mut().iter_mut().zip(m).for_each(|(z, f)| *z *= *f);
            absorbed += before - psi.norm_sqr();
        }
        n += 1;
        let t = n as f64 * dt;
        if n % cfg.record_stride == 0 || n == steps {
            let smp = record(&psi, t)?;
            samples.push(smp);
            stopped = stop(&smp);
        }
        if let Some(k) = cfg.snapshot_stride {
            if k > 0 && n % k == 0 {
                snapshots.push((t, psi.clone()));
            }
        }
    }
    Ok(Trajectory { samples, final_state: psi, snapshots, absorbed_norm: absorbed, stopped: stopped && n < steps })
}

/// Frozen evolution V_μ(T) ψ0 under `op`.
pub fn propagate_static(psi0: &Spinor, op: &DiscreteOperator, total: f64, cfg: &PropagationConfig, probe: Option<&Spinor>) -> Result<Trajectory> {
    if !(total > 0.0) {
        return Err(invalid(format!("propagation time must be positive, got {total}")));
    }
    cfg.validate(op.potential())?;
    let mu = op.mu();
    evolve(psi0, op, &|_| mu, total, 0.0, cfg, probe, &mut |_| false)
}

/// U^ε(s_end, s_start) ψ0 with D_{μ(s)} evaluated at step midpoints.
#[allow(clippy::too_many_arguments)]
pub fn propagate_adiabatic(
    psi0: &Spinor,
    grid: &RadialGrid,
    potential: &PotentialSpec,
    profile: &SwitchingProfile,
    s_start: f64,
    s_end: f64,
    cfg: &PropagationConfig,
    probe: Option<&Spinor>,
) -> Result<Trajectory> {
    if !(s_start < s_end) {
        return Err(invalid(format!("need s_start < s_end, got {s_start} >= {s_end}")));
    }
    adiabatic_run(psi0, grid, potential, profile, s_start, s_end, cfg, probe, &mut |_| false)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn adiabatic_run(
    psi0: &Spinor,
    grid: &RadialGrid,
    potential: &PotentialSpec,
    profile: &SwitchingProfile,
    s_start: f64,
    s_end: f64,
    cfg: &PropagationConfig,
    probe: Option<&Spinor>,
    stop: &mut dyn FnMut(&Sample) -> bool,
) -> Result<Trajectory> {
    cfg.validate(potential)?;
    let span = (s_end - s_start).abs() / cfg.epsilon;
    let need = span + potential.radius + BOX_MARGIN;
    if grid.length() < need && !cfg.absorber {
        return Err(LabError::BoxTooSmall { have: grid.length(), need });
    }
    let base = assemble_operator(grid, psi0.channel(), potential, 0.0)?;
    let eps = cfg.epsilon;
    // negative total time runs the evolution backward
    let total = (s_end - s_start) / eps;
    evolve(psi0, &base, &|t| profile.eval(s_start + eps * t), total, s_start, cfg, probe, stop)
}
