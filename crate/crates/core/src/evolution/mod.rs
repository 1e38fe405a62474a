//! Explicit gradient-flow stepping `S^{i+1} = (id + δt v^i)_# S^i`.
//!
//! Each step freezes the force at `S^i`, solves the velocity problem, moves
//! the nodes, removes loops below the annihilation length, remeshes loops
//! whose segments left the band and records diagnostics. The force is the
//! negative discrete energy gradient per unit length, projected normal to
//! the line, so that `Φ(S^{i+1}) − Φ(S^i) = −δt ⟨f, v⟩ + O(δt²)` holds for
//! the discrete energy itself.

pub mod monitor;
pub mod velocity;

use std::io::Write;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::elasticity::Vec3;
use crate::energy_force::{energy_line, variational_force, EnergyBreakdown, ForceField};
use crate::error::{DddError, Result};
use crate::geometry::{mass_ratio, remesh, DislocationNetwork};
use crate::kernels::KernelEvaluator;
use crate::mobility::MobilityModel;
use crate::quadrature::LineQuadratureRule;

pub use monitor::{bound_ratios, BoundInputs, BoundRatios, VelocityNorms};
pub use velocity::{solve_velocity, velocity_norms, weak_form_terms, VelocityField};

/// Time step, remeshing and termination controls. Lengths are multiples
/// of `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepPolicy {
    pub c1: f64,
    pub c2: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub t_end: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub kappa: f64,
    pub theta_max: f64,
    pub max_steps: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            c1: 0.1,
            c2: 0.1,
            dt_max: 1.0,
            dt_min: 1e-12,
            t_end: 1000.0,
            h_min: 0.3,
            h_max: 1.0,
            kappa: 3.0,
            theta_max: 50.0,
            max_steps: 100_000,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(DddError::invalid(name, format!("must be positive, got {v}")))
            }
        };
        pos("c1", self.c1)?;
        pos("c2", self.c2)?;
        pos("dt_max", self.dt_max)?;
        pos("dt_min", self.dt_min)?;
        pos("t_end", self.t_end)?;
        pos("h_min", self.h_min)?;
        pos("kappa", self.kappa)?;
        pos("theta_max", self.theta_max)?;
        if self.h_max <= self.h_min {
            return Err(DddError::invalid("h_max", "must exceed h_min"));
        }
        if self.dt_min > self.dt_max {
            return Err(DddError::invalid("dt_min", "must not exceed dt_max"));
        }
        if self.kappa < 3.0 * self.h_min {
            return Err(DddError::invalid("kappa", "must be at least 3 h_min so that surviving loops can be remeshed"));
        }
        Ok(())
    }
}

/// One row of `diagnostics.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub nodes: usize,
    pub loops: usize,
    pub mass: f64,
    pub theta_hat: f64,
    pub energy: f64,
    /// Energy after the step, including any remeshing.
    pub energy_after: f64,
    /// Change of energy over the flow update alone; remeshing perturbations
    /// are reported in the event log.
    pub energy_decrement: f64,
    /// `⟨f, v⟩` at the start of the step.
    pub dissipation: f64,
    pub v_max: f64,
    pub grad_v_max: f64,
    pub f_max: f64,
    pub ratio_ap_vel: f64,
    pub ratio_pk_linf: f64,
    pub ratio_length_rate: f64,
    pub ratio_mass: f64,
    pub ratio_v_uniform: f64,
    pub ratio_dv_uniform: f64,
}

impl DiagnosticsRecord {
    pub fn ratios(&self) -> BoundRatios {
        BoundRatios {
            ap_vel: self.ratio_ap_vel,
            pk_linf: self.ratio_pk_linf,
            length_rate: self.ratio_length_rate,
            mass: self.ratio_mass,
            v_uniform: self.ratio_v_uniform,
            dv_uniform: self.ratio_dv_uniform,
        }
    }
}

/// Entries of `events.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Remesh {
        step: usize,
        t: f64,
        loops: Vec<usize>,
        energy_before: f64,
        energy_after: f64,
        mass_before: f64,
        mass_after: f64,
    },
    Annihilation {
        step: usize,
        t: f64,
        loop_index: usize,
        length: f64,
    },
    /// The per-node trajectory map is abandoned at the first topology or
    /// resampling change; later motion is described by this log.
    TrajectoryReset { step: usize, t: f64 },
    Terminated { step: usize, t: f64, reason: Termination },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    EndTime,
    Empty,
    BlowUp { theta: f64 },
    DtFloor { dt: f64 },
    MaxSteps,
}

/// Evolving network with its cached force and history.
#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub time: f64,
    pub step: usize,
    pub network: DislocationNetwork,
    pub mass0: f64,
    /// Cumulative displacement of every node of `S⁰`, until the first remesh.
    pub trajectory: Option<Vec<Vec3>>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub events: Vec<Event>,
    cache: Option<(EnergyBreakdown, ForceField)>,
}

impl EvolutionState {
    pub fn new(network: DislocationNetwork) -> Self {
        let n = network.node_count();
        EvolutionState {
            time: 0.0,
            step: 0,
            mass0: network.mass(),
            trajectory: Some(vec![Vec3::zeros(); n]),
            network,
            diagnostics: Vec::new(),
            events: Vec::new(),
            cache: None,
        }
    }

    /// Mean distance of the nodes from the centroid of each loop, averaged
    /// over loops.
    pub fn mean_radius(&self) -> f64 {
        let loops = self.network.loops();
        let sum: f64 = loops
            .iter()
            .map(|l| {
                let c = l.centroid();
                l.nodes().iter().map(|x| (x - c).norm()).sum::<f64>() / l.len() as f64
            })
            .sum();
        sum / loops.len().max(1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    Continue,
    Terminated(Termination),
}

/// Everything a run needs besides the network.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub evaluator: KernelEvaluator,
    pub mobility: MobilityModel,
    pub rule: LineQuadratureRule,
    pub policy: StepPolicy,
}

/// Force and velocity at the current state, before moving.
#[derive(Clone, Debug)]
pub struct StepData {
    pub energy: f64,
    pub force: ForceField,
    pub velocity: VelocityField,
    pub theta: f64,
    pub norms: VelocityNorms,
    pub dissipation: f64,
}

impl Simulation {
    pub fn new(evaluator: KernelEvaluator, mobility: MobilityModel, rule: LineQuadratureRule, policy: StepPolicy) -> Result<Self> {
        mobility.validate()?;
        policy.validate()?;
        Ok(Simulation {
            evaluator,
            mobility,
            rule,
            policy,
        })
    }

    fn beta(&self, s: &DislocationNetwork) -> f64 {
        s.loops()
            .iter()
            .map(|l| self.mobility.beta(l.burgers().norm()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Force, velocity and their norms at the current network.
    pub fn evaluate(&self, state: &mut EvolutionState) -> Result<StepData> {
        let s = &state.network;
        if state.cache.is_none() {
            state.cache = Some(variational_force(s, &self.evaluator, &self.rule)?);
        }
        let (e, f) = state.cache.clone().expect("filled above");
        let v = solve_velocity(s, &f, &self.mobility)?;
        let theta = mass_ratio(s)?.theta;
        let (grad_sup, grad_l1, h1) = velocity_norms(s, &v.velocity, &f.lumped_length);
        let dissipation = f
            .force
            .iter()
            .zip(&v.velocity)
            .zip(&f.lumped_length)
            .map(|((fi, vi), l)| l * fi.dot(vi))
            .sum();
        Ok(StepData {
            energy: e.total,
            norms: VelocityNorms {
                h1,
                grad_l1,
                sup: v.max_norm(),
                grad_sup,
            },
            force: f,
            velocity: v,
            theta,
            dissipation,
        })
    }

    /// Step size from the policy: `min(c1 ε/‖v‖_∞, c2/‖∇_τ v‖_∞, dt_max)`,
    /// clipped to the end time.
    pub fn policy_dt(&self, state: &EvolutionState, d: &StepData) -> f64 {
        let p = &self.policy;
        let eps = state.network.epsilon();
        let mut dt = p.dt_max;
        if d.norms.sup > 0.0 {
            dt = dt.min(p.c1 * eps / d.norms.sup);
        }
        if d.norms.grad_sup > 0.0 {
            dt = dt.min(p.c2 / d.norms.grad_sup);
        }
        dt.min(p.t_end - state.time).max(0.0)
    }

    fn inputs(&self, state: &EvolutionState, theta: f64) -> BoundInputs {
        let s = &state.network;
        BoundInputs {
            epsilon: s.epsilon(),
            mass: s.mass(),
            theta,
            b_max: s.max_burgers().unwrap_or(0.0),
            alpha: self.mobility.alpha,
            beta: self.beta(s),
            mass0: state.mass0,
            elapsed: state.time,
        }
    }

    fn terminate(&self, state: &mut EvolutionState, reason: Termination) -> StepOutcome {
        info!("terminated at step {} (t = {}): {:?}", state.step, state.time, reason);
        state.events.push(Event::Terminated {
            step: state.step,
            t: state.time,
            reason,
        });
        StepOutcome::Terminated(reason)
    }

    /// Advance by `dt`, or by the policy step when `dt` is `None`.
    pub fn step(&self, state: &mut EvolutionState, dt: Option<f64>) -> Result<StepOutcome> {
        if state.network.is_empty() {
            return Ok(self.terminate(state, Termination::Empty));
        }
        let d = self.evaluate(state)?;
        let dt = match dt {
            Some(dt) if dt >= 0.0 && dt.is_finite() => dt,
            Some(dt) => return Err(DddError::invalid("dt", format!("must be finite and nonnegative, got {dt}"))),
            None => self.policy_dt(state, &d),
        };
        let x = self.inputs(state, d.theta);
        let ratios = bound_ratios(&x, &d.norms, d.force.max_norm());
        let mut rec = DiagnosticsRecord {
            step: state.step,
            t: state.time,
            dt,
            nodes: state.network.node_count(),
            loops: state.network.loops().len(),
            mass: x.mass,
            theta_hat: d.theta,
            energy: d.energy,
            energy_after: d.energy,
            energy_decrement: 0.0,
            dissipation: d.dissipation,
            v_max: d.norms.sup,
            grad_v_max: d.norms.grad_sup,
            f_max: d.force.max_norm(),
            ratio_ap_vel: ratios.ap_vel,
            ratio_pk_linf: ratios.pk_linf,
            ratio_length_rate: ratios.length_rate,
            ratio_mass: ratios.mass,
            ratio_v_uniform: ratios.v_uniform,
            ratio_dv_uniform: ratios.dv_uniform,
        };
        if d.theta > self.policy.theta_max {
            state.diagnostics.push(rec);
            return Ok(self.terminate(state, Termination::BlowUp { theta: d.theta }));
        }
        if dt == 0.0 {
            state.diagnostics.push(rec);
            return Ok(StepOutcome::Continue);
        }
        let displacement: Vec<Vec3> = d.velocity.velocity.iter().map(|v| v * dt).collect();
        let moved = state.network.pushforward(&displacement)?;
        let eps = moved.epsilon();
        let mut reset = false;
        // annihilation
        let mut kept = Vec::new();
        for (i, l) in moved.loops().iter().enumerate() {
            let length = l.length();
            if length < self.policy.kappa * eps {
                state.events.push(Event::Annihilation {
                    step: state.step,
                    t: state.time + dt,
                    loop_index: i,
                    length,
                });
                reset = true;
            } else {
                kept.push(l.clone());
            }
        }
        let mut next = if reset { moved.with_loops(kept)? } else { moved };
        let mut pre_remesh_energy = None;
        if !next.is_empty() {
            let (remeshed, report) = remesh(&next, self.policy.h_min * eps, self.policy.h_max * eps)?;
            if !report.remeshed_loops.is_empty() {
                let before = energy_line(&next, &self.evaluator, &self.rule)?.total;
                let after = energy_line(&remeshed, &self.evaluator, &self.rule)?.total;
                debug!("remeshed loops {:?}, energy change {:e}", report.remeshed_loops, after - before);
                state.events.push(Event::Remesh {
                    step: state.step,
                    t: state.time + dt,
                    loops: report.remeshed_loops.clone(),
                    energy_before: before,
                    energy_after: after,
                    mass_before: report.mass_before,
                    mass_after: report.mass_after,
                });
                reset = true;
                pre_remesh_energy = Some(before);
                next = remeshed;
            }
        }
        match (&mut state.trajectory, reset) {
            (Some(_), true) => {
                state.trajectory = None;
                state.events.push(Event::TrajectoryReset {
                    step: state.step,
                    t: state.time + dt,
                });
            }
            (Some(u), false) => {
                for (ui, di) in u.iter_mut().zip(&displacement) {
                    *ui += di;
                }
            }
            _ => {}
        }
        state.cache = if next.is_empty() {
            None
        } else {
            Some(variational_force(&next, &self.evaluator, &self.rule)?)
        };
        let energy_after = state.cache.as_ref().map_or(0.0, |c| c.0.total);
        rec.energy_after = energy_after;
        rec.energy_decrement = pre_remesh_energy.unwrap_or(energy_after) - d.energy;
        state.diagnostics.push(rec);
        state.network = next;
        state.time += dt;
        state.step += 1;
        if dt < self.policy.dt_min && state.time < self.policy.t_end {
            return Ok(self.terminate(state, Termination::DtFloor { dt }));
        }
        Ok(StepOutcome::Continue)
    }

    /// Step until the end time, an empty network, blow-up, the step floor or
    /// the step limit. `observer` sees every new diagnostics row.
    pub fn run<F: FnMut(&EvolutionState, &DiagnosticsRecord) -> Result<()>>(
        &self,
        s0: DislocationNetwork,
        mut observer: F,
    ) -> Result<(EvolutionState, Termination)> {
        let mut state = EvolutionState::new(s0);
        loop {
            let reason = if state.network.is_empty() {
                Some(Termination::Empty)
            } else if state.time >= self.policy.t_end {
                Some(Termination::EndTime)
            } else if state.step >= self.policy.max_steps {
                Some(Termination::MaxSteps)
            } else {
                None
            };
            if let Some(r) = reason {
                self.terminate(&mut state, r);
                return Ok((state, r));
            }
            let n = state.diagnostics.len();
            let outcome = self.step(&mut state, None)?;
            if state.diagnostics.len() > n {
                observer(&state, state.diagnostics.last().expect("just pushed"))?;
            }
            if let StepOutcome::Terminated(r) = outcome {
                return Ok((state, r));
            }
        }
    }
}

/// Largest value of every bound ratio over a run.
pub fn bound_monitor(records: &[DiagnosticsRecord]) -> Result<BoundRatios> {
    if records.is_empty() {
        return Err(DddError::invalid("diagnostics", "no records"));
    }
    Ok(records
        .iter()
        .fold(BoundRatios::default(), |acc, r| acc.componentwise_max(&r.ratios())))
}

/// Diagnostics as CSV, one row per record.
pub fn write_diagnostics<W: Write>(out: W, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| DddError::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| DddError::Format(e.to_string()))?;
    Ok(())
}

/// Events as JSON lines.
pub fn write_events<W: Write>(mut out: W, events: &[Event]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n").map_err(|e| DddError::Format(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
