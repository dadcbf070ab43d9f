use serde::{Deserialize, Serialize};

use super::PhysicsConstants;
use crate::error::{input_err, Error, Result};
use crate::units::{mhz_to_rad_per_us, rad_per_us_to_mhz};

/// Knot times may overshoot the schedule window by this much (μs).
const TIME_SLACK: f64 = 1e-9;

/// Linear interpolation between `(t, value)` knots with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        check_knots(&knots)?;
        Ok(Self { knots })
    }

    pub fn constant(value: f64, t_end: f64) -> Self {
        Self {
            knots: vec![(0.0, value), (t_end, value)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn knots_mut(&mut self) -> &mut [(f64, f64)] {
        &mut self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    /// Value at `t`; times outside the knot range take the nearest end value.
    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let hi = k.partition_point(|p| p.0 <= t);
        let (t0, v0) = k[hi - 1];
        let (t1, v1) = k[hi];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            knots: self.knots.iter().map(|&(t, v)| (t, f(v))).collect(),
        }
    }
}

/// Step function: the value of the last knot at or before `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseConstant {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        check_knots(&knots)?;
        Ok(Self { knots })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            knots: vec![(0.0, value)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn start(&self) -> f64 {
        self.knots[0].0
    }

    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|p| p.0 <= t);
        self.knots[idx.saturating_sub(1)].1
    }
}

fn check_knots(knots: &[(f64, f64)]) -> Result<()> {
    if knots.is_empty() {
        return Err(input_err!("waveform needs at least one knot"));
    }
    if knots.iter().any(|(t, v)| !(t.is_finite() && v.is_finite())) {
        return Err(input_err!("waveform knots must be finite"));
    }
    if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(input_err!("waveform knot times must be strictly increasing"));
    }
    Ok(())
}

/// Control waveforms for one run, rates in rad/μs and phases in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub t_max: f64,
    pub omega: PiecewiseLinear,
    pub delta_global: PiecewiseLinear,
    pub phi: PiecewiseConstant,
    /// Time-constant per-atom detunings Δ_i.
    pub local_detuning: Option<Vec<f64>>,
}

impl PulseSchedule {
    /// Constant Ω, Δ and φ over `[0, t_max]`.
    pub fn constant(t_max: f64, omega: f64, delta: f64, phi: f64) -> Self {
        Self {
            t_max,
            omega: PiecewiseLinear::constant(omega, t_max),
            delta_global: PiecewiseLinear::constant(delta, t_max),
            phi: PiecewiseConstant::constant(phi),
            local_detuning: None,
        }
    }

    pub fn with_local_detuning(mut self, detunings: Vec<f64>) -> Self {
        self.local_detuning = Some(detunings);
        self
    }

    /// Checks that every waveform is defined on `[t_start, t_end]`.
    pub fn check_defined_on(&self, t_start: f64, t_end: f64) -> Result<()> {
        if !(t_start.is_finite() && t_end.is_finite()) || t_start < -TIME_SLACK || t_end > self.t_max + TIME_SLACK {
            return Err(input_err!(
                "interval [{t_start}, {t_end}] is outside the schedule window [0, {}]",
                self.t_max
            ));
        }
        for (name, (lo, hi)) in [("omega", self.omega.domain()), ("delta", self.delta_global.domain())] {
            if lo > t_start + TIME_SLACK || hi < t_end - TIME_SLACK {
                return Err(input_err!(
                    "{name} waveform covers [{lo}, {hi}] but [{t_start}, {t_end}] was requested"
                ));
            }
        }
        if self.phi.start() > t_start + TIME_SLACK {
            return Err(input_err!("phase waveform starts after t = {t_start}"));
        }
        Ok(())
    }

    /// Hardware-legality check: Ω within `[0, omega_max]` and zero at both ends,
    /// `|Δ| ≤ delta_max` for global and local detunings.
    pub fn validate_hardware(&self, constants: &PhysicsConstants) -> Result<()> {
        const SLACK: f64 = 1e-9;
        let mut problems = Vec::new();
        for (k, &(t, v)) in self.omega.knots().iter().enumerate() {
            if v < -SLACK || v > constants.omega_max + SLACK {
                problems.push(format!("omega knot {k} (t={t}) = {v}"));
            }
        }
        let (first, last) = (self.omega.eval(0.0), self.omega.eval(self.t_max));
        if first.abs() > SLACK || last.abs() > SLACK {
            problems.push(format!("omega must start and end at 0 (got {first}, {last})"));
        }
        for (k, &(t, v)) in self.delta_global.knots().iter().enumerate() {
            if v.abs() > constants.delta_max + SLACK {
                problems.push(format!("delta knot {k} (t={t}) = {v}"));
            }
        }
        if let Some(local) = &self.local_detuning {
            for (i, &d) in local.iter().enumerate() {
                if d.abs() > constants.delta_max + SLACK {
                    problems.push(format!("local detuning {i} = {d}"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems.join("; ")))
        }
    }

    /// Clamps Ω to `[0, omega_max]` and Δ to `±delta_max`, and pins Ω to zero at
    /// `t = 0` and `t = t_max`. The flag reports whether anything changed.
    pub fn project_to_hardware(&self, constants: &PhysicsConstants) -> (Self, bool) {
        let mut out = self.clone();
        let mut changed = false;
        let t_max = self.t_max;
        for (t, v) in out.omega.knots_mut() {
            let mut nv = v.clamp(0.0, constants.omega_max);
            if t.abs() <= TIME_SLACK || (*t - t_max).abs() <= TIME_SLACK {
                nv = 0.0;
            }
            changed |= nv != *v;
            *v = nv;
        }
        // endpoints not on a knot: extend the waveform with explicit zero knots
        let (lo, hi) = out.omega.domain();
        if lo > TIME_SLACK || hi < t_max - TIME_SLACK {
            let mut knots = out.omega.knots().to_vec();
            if lo > TIME_SLACK {
                knots.insert(0, (0.0, 0.0));
            }
            if hi < t_max - TIME_SLACK {
                knots.push((t_max, 0.0));
            }
            out.omega = PiecewiseLinear { knots };
            changed = true;
        }
        for (_, v) in out.delta_global.knots_mut() {
            let nv = v.clamp(-constants.delta_max, constants.delta_max);
            changed |= nv != *v;
            *v = nv;
        }
        if let Some(local) = &mut out.local_detuning {
            for v in local.iter_mut() {
                let nv = v.clamp(-constants.delta_max, constants.delta_max);
                changed |= nv != *v;
                *v = nv;
            }
        }
        (out, changed)
    }

    pub fn to_json(&self) -> ScheduleJson {
        ScheduleJson {
            t_max: self.t_max,
            omega: self.omega.map(rad_per_us_to_mhz).knots,
            delta: self.delta_global.map(rad_per_us_to_mhz).knots,
            phi: self.phi.knots.clone(),
            local_detuning_mhz: self
                .local_detuning
                .as_ref()
                .map(|v| v.iter().copied().map(rad_per_us_to_mhz).collect()),
        }
    }

    pub fn from_json(json: &ScheduleJson) -> Result<Self> {
        if !(json.t_max.is_finite() && json.t_max > 0.0) {
            return Err(input_err!("t_max must be positive"));
        }
        let omega = PiecewiseLinear::new(json.omega.clone())?.map(mhz_to_rad_per_us);
        let delta = PiecewiseLinear::new(json.delta.clone())?.map(mhz_to_rad_per_us);
        let phi = if json.phi.is_empty() {
            PiecewiseConstant::constant(0.0)
        } else {
            PiecewiseConstant::new(json.phi.clone())?
        };
        Ok(Self {
            t_max: json.t_max,
            omega,
            delta_global: delta,
            phi,
            local_detuning: json
                .local_detuning_mhz
                .as_ref()
                .map(|v| v.iter().copied().map(mhz_to_rad_per_us).collect()),
        })
    }
}

/// Schedule file format. Ω and Δ knots are `[t_us, value_MHz]`, φ knots
/// `[t_us, radians]`; values are converted to rad/μs on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleJson {
    pub t_max: f64,
    pub omega: Vec<(f64, f64)>,
    pub delta: Vec<(f64, f64)>,
    #[serde(default)]
    pub phi: Vec<(f64, f64)>,
    #[serde(rename = "local_detuning_MHz", default)]
    pub local_detuning_mhz: Option<Vec<f64>>,
}
