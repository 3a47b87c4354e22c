//! Classical flow for H = (p1^2 + p2^2)/2 + V(x, y) with conservation
//! monitoring: classic fixed-step RK4 on Hamilton's equations, right-hand
//! sides generated symbolically from H and compiled to numeric closures.
//! Drift of the monitored integrals is the falsifiable numeric counterpart
//! of the exact commutation results.

use std::io::Write;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::phasepoly::{PhasePoint, PhasePolynomial};
use crate::rational::to_f64;
use crate::symexpr::Var;

/// One trajectory request. `monitors` are evaluated every `sample_stride`
/// steps; drift is measured against their t = 0 values.
#[derive(Debug, Clone)]
pub struct TrajectorySpec {
    pub initial: PhasePoint,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_stride: usize,
    /// Integration halts with `DomainExit` when x falls below this.
    pub x_min: f64,
    pub monitors: Vec<(String, PhasePolynomial)>,
}

impl TrajectorySpec {
    pub fn new(initial: PhasePoint, alpha: f64, t_end: f64, dt: f64) -> Self {
        Self {
            initial,
            alpha,
            t_end,
            dt,
            sample_stride: 10,
            x_min: 1e-6,
            monitors: Vec::new(),
        }
    }

    pub fn with_monitor(mut self, name: &str, m: PhasePolynomial) -> Self {
        self.monitors.push((name.to_string(), m));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(Error::Invalid("dt must be positive".into()));
        }
        if self.initial.x.is_nan() || self.initial.x <= 0.0 {
            return Err(Error::Invalid("initial point needs x > 0".into()));
        }
        if self.t_end <= 0.0 {
            return Err(Error::Invalid("t_end must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    Completed,
    /// x reached the singular axis; partial record returned.
    DomainExit,
    /// A state component became non-finite; partial record returned.
    NonFinite,
}

/// Sampled trajectory with monitor values and drift summaries.
#[derive(Debug, Clone)]
pub struct DriftRecord {
    pub status: TrajectoryStatus,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub monitor_names: Vec<String>,
    /// One series per monitor, aligned with `times`.
    pub values: Vec<Vec<f64>>,
    /// Max |m(t) - m(0)| / |m(0)| per monitor (absolute drift when the
    /// initial value is below 1e-12 in magnitude).
    pub max_relative_drift: Vec<f64>,
    pub final_state: PhasePoint,
    pub final_time: f64,
}

impl DriftRecord {
    /// CSV rows "t,x,y,p1,p2,<monitors...>" at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t,x,y,p1,p2")?;
        for name in &self.monitor_names {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for (i, t) in self.times.iter().enumerate() {
            let s = &self.states[i];
            write!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, s.x, s.y, s.p1, s.p2
            )?;
            for series in &self.values {
                write!(w, ",{:.16e}", series[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Exponent kind split at compile time so integer powers avoid powf.
#[derive(Debug, Clone, Copy)]
enum Exp {
    Zero,
    Int(i32),
    Frac(f64),
}

impl Exp {
    fn from_rational(r: &crate::rational::Rational) -> Result<Self> {
        if r.is_zero() {
            return Ok(Exp::Zero);
        }
        if r.is_integer() {
            let n = r
                .to_integer()
                .to_i32()
                .ok_or_else(|| Error::Exactness("exponent too large to compile".into()))?;
            return Ok(Exp::Int(n));
        }
        Ok(Exp::Frac(to_f64(r)))
    }

    fn apply(self, base: f64) -> f64 {
        match self {
            Exp::Zero => 1.0,
            Exp::Int(n) => base.powi(n),
            Exp::Frac(e) => base.powf(e),
        }
    }
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coeff: f64,
    x_exp: Exp,
    y_exp: Exp,
    p1_pow: i32,
    p2_pow: i32,
}

/// A phase polynomial compiled to a flat term list for fast evaluation,
/// with alpha folded into the coefficients (classical flow has hbar = 0).
#[derive(Debug, Clone)]
pub struct CompiledPhasePoly {
    terms: Vec<CompiledTerm>,
}

impl CompiledPhasePoly {
    pub fn compile(p: &PhasePolynomial, alpha: f64) -> Result<Self> {
        let mut terms = Vec::new();
        for (&(k, l), e) in p.terms() {
            for (key, c) in e.terms() {
                if key.hbar_pow > 0 {
                    continue; // classical flow
                }
                if !c.is_real() {
                    return Err(Error::Invalid(
                        "cannot compile a complex-coefficient observable".into(),
                    ));
                }
                terms.push(CompiledTerm {
                    coeff: to_f64(&c.re) * alpha.powi(key.alpha_pow as i32),
                    x_exp: Exp::from_rational(&key.x_exp)?,
                    y_exp: Exp::from_rational(&key.y_exp)?,
                    p1_pow: k as i32,
                    p2_pow: l as i32,
                });
            }
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, s: &PhasePoint) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.coeff
                * t.x_exp.apply(s.x)
                * t.y_exp.apply(s.y)
                * s.p1.powi(t.p1_pow)
                * s.p2.powi(t.p2_pow);
        }
        acc
    }
}

/// Hamilton's equations compiled from a symbolic H.
struct CompiledFlow {
    dx: CompiledPhasePoly,  // dH/dp1
    dy: CompiledPhasePoly,  // dH/dp2
    dp1: CompiledPhasePoly, // -dH/dx
    dp2: CompiledPhasePoly, // -dH/dy
}

impl CompiledFlow {
    fn new(h: &PhasePolynomial, alpha: f64) -> Result<Self> {
        Ok(Self {
            dx: CompiledPhasePoly::compile(&h.diff_momentum(1), alpha)?,
            dy: CompiledPhasePoly::compile(&h.diff_momentum(2), alpha)?,
            dp1: CompiledPhasePoly::compile(&-&h.diff_pos(Var::X), alpha)?,
            dp2: CompiledPhasePoly::compile(&-&h.diff_pos(Var::Y), alpha)?,
        })
    }

    fn rhs(&self, s: &PhasePoint) -> [f64; 4] {
        [
            self.dx.eval(s),
            self.dy.eval(s),
            self.dp1.eval(s),
            self.dp2.eval(s),
        ]
    }
}

fn advance(s: &PhasePoint, k: &[f64; 4], h: f64) -> PhasePoint {
    PhasePoint {
        x: s.x + h * k[0],
        y: s.y + h * k[1],
        p1: s.p1 + h * k[2],
        p2: s.p2 + h * k[3],
    }
}

/// Classic RK4 on Hamilton's equations for the given Hamiltonian, sampling
/// the monitors along the way. Integration halts early on domain exit
/// (x <= x_min) or non-finite state, returning the partial record.
pub fn integrate(h: &PhasePolynomial, spec: &TrajectorySpec) -> Result<DriftRecord> {
    spec.validate()?;
    let flow = CompiledFlow::new(h, spec.alpha)?;
    let monitors: Vec<CompiledPhasePoly> = spec
        .monitors
        .iter()
        .map(|(_, m)| CompiledPhasePoly::compile(m, spec.alpha))
        .collect::<Result<_>>()?;

    let steps = (spec.t_end / spec.dt).round() as usize;
    let mut state = spec.initial;
    let mut status = TrajectoryStatus::Completed;

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); monitors.len()];
    let mut initial_values = vec![0.0; monitors.len()];
    let mut max_drift = vec![0.0f64; monitors.len()];

    let sample = |t: f64,
                  s: &PhasePoint,
                  first: bool,
                  times: &mut Vec<f64>,
                  states: &mut Vec<PhasePoint>,
                  values: &mut Vec<Vec<f64>>,
                  initial_values: &mut Vec<f64>,
                  max_drift: &mut Vec<f64>| {
        times.push(t);
        states.push(*s);
        for (i, m) in monitors.iter().enumerate() {
            let v = m.eval(s);
            values[i].push(v);
            if first {
                initial_values[i] = v;
            } else {
                let v0 = initial_values[i];
                let drift = if v0.abs() < 1e-12 {
                    (v - v0).abs()
                } else {
                    ((v - v0) / v0).abs()
                };
                max_drift[i] = max_drift[i].max(drift);
            }
        }
    };

    sample(
        0.0,
        &state,
        true,
        &mut times,
        &mut states,
        &mut values,
        &mut initial_values,
        &mut max_drift,
    );

    let domain_ok = |s: &PhasePoint| s.x > spec.x_min;

    let mut t = 0.0;
    'steps: for step in 1..=steps {
        // Substage points must stay inside the domain; the potential is
        // singular on the x = 0 axis.
        let k1 = flow.rhs(&state);
        let s2 = advance(&state, &k1, spec.dt / 2.0);
        if !domain_ok(&s2) {
            status = TrajectoryStatus::DomainExit;
            break 'steps;
        }
        let k2 = flow.rhs(&s2);
        let s3 = advance(&state, &k2, spec.dt / 2.0);
        if !domain_ok(&s3) {
            status = TrajectoryStatus::DomainExit;
            break 'steps;
        }
        let k3 = flow.rhs(&s3);
        let s4 = advance(&state, &k3, spec.dt);
        if !domain_ok(&s4) {
            status = TrajectoryStatus::DomainExit;
            break 'steps;
        }
        let k4 = flow.rhs(&s4);
        state = PhasePoint {
            x: state.x + spec.dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y: state.y + spec.dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            p1: state.p1 + spec.dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            p2: state.p2 + spec.dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
        };
        t = step as f64 * spec.dt;

        if !domain_ok(&state) {
            status = TrajectoryStatus::DomainExit;
            break;
        }
        let finite = state.x.is_finite()
            && state.y.is_finite()
            && state.p1.is_finite()
            && state.p2.is_finite();
        if !finite {
            status = TrajectoryStatus::NonFinite;
            break;
        }
        if step % spec.sample_stride == 0 || step == steps {
            sample(
                t,
                &state,
                false,
                &mut times,
                &mut states,
                &mut values,
                &mut initial_values,
                &mut max_drift,
            );
        }
    }

    Ok(DriftRecord {
        status,
        times,
        states,
        monitor_names: spec.monitors.iter().map(|(n, _)| n.clone()).collect(),
        values,
        max_relative_drift: max_drift,
        final_state: state,
        final_time: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detsys::hamiltonian_classical;
    use crate::symexpr::Expression;

    #[test]
    fn free_particle_is_exact() {
        let h = hamiltonian_classical(&Expression::zero());
        let spec = TrajectorySpec::new(
            PhasePoint {
                x: 1.0,
                y: 0.0,
                p1: 1.0,
                p2: 0.0,
            },
            0.0,
            1.0,
            1e-3,
        )
        .with_monitor("H", h.clone());
        let rec = integrate(&h, &spec).unwrap();
        assert_eq!(rec.status, TrajectoryStatus::Completed);
        // Constant momenta: RK4 reproduces the straight line exactly.
        assert_eq!(rec.max_relative_drift[0], 0.0);
        assert!((rec.final_state.x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        let h = hamiltonian_classical(&Expression::zero());
        let bad = TrajectorySpec::new(
            PhasePoint {
                x: -1.0,
                y: 0.0,
                p1: 0.0,
                p2: 0.0,
            },
            1.0,
            1.0,
            1e-3,
        );
        assert!(integrate(&h, &bad).is_err());
        let bad_dt = TrajectorySpec::new(
            PhasePoint {
                x: 1.0,
                y: 0.0,
                p1: 0.0,
                p2: 0.0,
            },
            1.0,
            1.0,
            0.0,
        );
        assert!(integrate(&h, &bad_dt).is_err());
    }

    #[test]
    fn domain_exit_reported() {
        // Strong pull toward the singular axis: V = y/x^(2/3) with y
        // forced very negative immediately.
        let v = Expression::parse("alpha*y*x^(-2/3)").unwrap();
        let h = hamiltonian_classical(&v);
        let spec = TrajectorySpec::new(
            PhasePoint {
                x: 0.05,
                y: -50.0,
                p1: -1.0,
                p2: 0.0,
            },
            1.0,
            5.0,
            1e-3,
        );
        let rec = integrate(&h, &spec).unwrap();
        assert_eq!(rec.status, TrajectoryStatus::DomainExit);
        assert!(rec.final_time < 5.0);
    }

    #[test]
    fn csv_shape() {
        let h = hamiltonian_classical(&Expression::zero());
        let spec = TrajectorySpec::new(
            PhasePoint {
                x: 1.0,
                y: 0.0,
                p1: 1.0,
                p2: 0.5,
            },
            0.0,
            0.01,
            1e-3,
        )
        .with_monitor("H", h.clone());
        let rec = integrate(&h, &spec).unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,y,p1,p2,H");
        assert!(lines.next().unwrap().starts_with("0.0000000000000000e0,"));
    }
}
