//! Wire-length command generation.
//!
//! A plan's wire series carries no timing. The pipeline assigns knot times
//! so no wire has to move faster than the speed ceiling, interpolates the
//! knots with a C1 piecewise-cubic (Hermite with central-difference
//! tangents, one-sided at the ends, so two knots degenerate to a straight
//! line), stretches the timeline by the walking scale and samples at the
//! control rate.
//!
//! Cubic interpolation can overshoot between knots, so the knot-time
//! allocation alone does not bound the realized speed. The emitter computes
//! the exact maximum of the spline's derivative (quadratic per segment) and
//! dilates the timeline by the smallest factor that restores the ceiling.
//! The factor depends only on the knot shape, never on the walking scale or
//! the sample grid, which keeps the emitted duration exactly linear in the
//! walking scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WIRES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Per-wire speed ceiling (mm/s).
    pub max_wire_speed: f64,
    /// Floor on the time between consecutive knots (s).
    pub min_step_time: f64,
    /// Output sample rate (Hz).
    pub control_rate: f64,
    /// Uniform time dilation; >= 1 so scaling can only slow the gait.
    pub walking_scale: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_wire_speed: 50.0,
            min_step_time: 0.01,
            control_rate: 100.0,
            walking_scale: 1.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_wire_speed > 0.0)
            || !(self.control_rate > 0.0)
            || !(self.min_step_time >= 0.0)
        {
            return Err(Error::invalid(
                "pipeline config",
                "speeds, rates and step time must be positive",
            ));
        }
        if !(self.walking_scale >= 1.0) {
            return Err(Error::invalid(
                "pipeline config",
                "walking scale must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Assign a timestamp to every sample of a wire series. The time step to
/// the next knot is the worst wire's travel divided by the speed ceiling,
/// floored at the minimum step time.
pub fn allocate_times(
    series: &[[f64; WIRES]],
    cfg: &PipelineConfig,
) -> Result<Vec<(f64, [f64; WIRES])>> {
    cfg.validate()?;
    if series.len() < 2 {
        return Err(Error::EmptySeries);
    }
    let mut out = Vec::with_capacity(series.len());
    let mut t = 0.0;
    out.push((t, series[0]));
    for w in series.windows(2) {
        let travel = (0..WIRES)
            .map(|j| (w[1][j] - w[0][j]).abs())
            .fold(0.0f64, f64::max);
        t += (travel / cfg.max_wire_speed).max(cfg.min_step_time);
        out.push((t, w[1]));
    }
    Ok(out)
}

/// C1 piecewise-cubic interpolant through timestamped knots, queryable at
/// any time; queries outside the domain clamp to the endpoint values.
#[derive(Debug, Clone)]
pub struct WireTrajectory {
    times: Vec<f64>,
    values: Vec<[f64; WIRES]>,
    tangents: Vec<[f64; WIRES]>,
}

/// Build the interpolant. Interior tangents are central differences over
/// the non-uniform grid; end tangents are the one-sided slopes.
pub fn spline(knots: &[(f64, [f64; WIRES])]) -> Result<WireTrajectory> {
    if knots.len() < 2 {
        return Err(Error::EmptySeries);
    }
    for (i, pair) in knots.windows(2).enumerate() {
        if !(pair[1].0 > pair[0].0) {
            return Err(Error::NonMonotoneTime { index: i + 1 });
        }
    }
    let times: Vec<f64> = knots.iter().map(|k| k.0).collect();
    let values: Vec<[f64; WIRES]> = knots.iter().map(|k| k.1).collect();
    let n = knots.len();
    let mut tangents = vec![[0.0; WIRES]; n];
    for j in 0..WIRES {
        tangents[0][j] = (values[1][j] - values[0][j]) / (times[1] - times[0]);
        tangents[n - 1][j] = (values[n - 1][j] - values[n - 2][j]) / (times[n - 1] - times[n - 2]);
        for i in 1..n - 1 {
            tangents[i][j] = (values[i + 1][j] - values[i - 1][j]) / (times[i + 1] - times[i - 1]);
        }
    }
    Ok(WireTrajectory {
        times,
        values,
        tangents,
    })
}

impl WireTrajectory {
    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn segment_of(&self, t: f64) -> usize {
        match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> [f64; WIRES] {
        if t <= self.start_time() {
            return self.values[0];
        }
        if t >= self.end_time() {
            return *self.values.last().unwrap();
        }
        let i = self.segment_of(t);
        let h = self.times[i + 1] - self.times[i];
        let u = (t - self.times[i]) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        std::array::from_fn(|j| {
            h00 * self.values[i][j]
                + h10 * h * self.tangents[i][j]
                + h01 * self.values[i + 1][j]
                + h11 * h * self.tangents[i + 1][j]
        })
    }

    /// Exact maximum of |d/dt| over the whole trajectory. Per segment the
    /// derivative is quadratic in the local parameter, so the extrema lie
    /// at the segment ends or the vertex of the quadratic.
    pub fn max_abs_velocity(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.times.len() - 1 {
            let h = self.times[i + 1] - self.times[i];
            for j in 0..WIRES {
                let p0 = self.values[i][j];
                let p1 = self.values[i + 1][j];
                let m0 = self.tangents[i][j] * h;
                let m1 = self.tangents[i + 1][j] * h;
                // dp/du = a u^2 + b u + c
                let a = 6.0 * (p0 - p1) + 3.0 * (m0 + m1);
                let b = -6.0 * (p0 - p1) - 4.0 * m0 - 2.0 * m1;
                let c = m0;
                let mut candidates = vec![c, a + b + c];
                if a.abs() > 0.0 {
                    let u_star = -b / (2.0 * a);
                    if u_star > 0.0 && u_star < 1.0 {
                        candidates.push(a * u_star * u_star + b * u_star + c);
                    }
                }
                let seg_max = candidates.into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
                worst = worst.max(seg_max / h);
            }
        }
        worst
    }
}

/// Timestamped wire-length commands at the control rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandSeries {
    pub control_rate: f64,
    pub walking_scale: f64,
    /// Exact scaled timeline length (s); the sample grid covers it at the
    /// control rate, dropping any tail shorter than one period.
    pub duration: f64,
    pub samples: Vec<(f64, [f64; WIRES])>,
}

impl CommandSeries {
    /// Largest per-wire finite-difference speed between consecutive samples.
    pub fn max_sampled_speed(&self) -> f64 {
        let dt = 1.0 / self.control_rate;
        self.samples
            .windows(2)
            .flat_map(|w| (0..WIRES).map(move |j| (w[1].1[j] - w[0].1[j]).abs() / dt))
            .fold(0.0, f64::max)
    }

    /// Re-check the series invariants against its config.
    pub fn verify(&self, cfg: &PipelineConfig) -> Result<()> {
        let dt = 1.0 / self.control_rate;
        for (k, w) in self.samples.windows(2).enumerate() {
            if ((w[1].0 - w[0].0) - dt).abs() > 1e-9 {
                return Err(Error::NonMonotoneTime { index: k + 1 });
            }
        }
        let bound = cfg.max_wire_speed / cfg.walking_scale + 1e-9;
        let speed = self.max_sampled_speed();
        if speed > bound {
            return Err(Error::invalid(
                "command series",
                format!("sampled speed {speed:.6} exceeds bound {bound:.6}"),
            ));
        }
        Ok(())
    }
}

/// Run the full pipeline on a wire series: allocate knot times, spline,
/// bound the true spline velocity, scale time and sample.
pub fn emit_commands(series: &[[f64; WIRES]], cfg: &PipelineConfig) -> Result<CommandSeries> {
    let knots = allocate_times(series, cfg)?;
    let traj = spline(&knots)?;
    // smallest dilation that brings the analytic peak back under the
    // ceiling; independent of walking scale and sample grid
    let overshoot = traj.max_abs_velocity() / cfg.max_wire_speed;
    let dilation = if overshoot > 1.0 {
        overshoot * (1.0 + 1e-12)
    } else {
        1.0
    };
    let scale = cfg.walking_scale * dilation;
    let duration = traj.end_time() * scale;
    let dt = 1.0 / cfg.control_rate;
    let count = (duration / dt + 1e-9).floor() as usize;
    let samples = (0..=count)
        .map(|k| {
            let t = k as f64 * dt;
            (t, traj.eval(t / scale))
        })
        .collect();
    Ok(CommandSeries {
        control_rate: cfg.control_rate,
        walking_scale: cfg.walking_scale,
        duration,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> PipelineConfig {
        PipelineConfig {
            max_wire_speed: 20.0,
            min_step_time: 0.01,
            ..Default::default()
        }
    }

    #[test]
    fn step_time_from_worst_wire() {
        let series = vec![[0.0; 4], [10.0, 0.0, 0.0, 0.0]];
        let knots = allocate_times(&series, &cfg()).unwrap();
        assert_abs_diff_eq!(knots[1].0, 0.5, epsilon = 1e-12);

        let series = vec![[0.0; 4], [10.0, 30.0, 0.0, 0.0]];
        let knots = allocate_times(&series, &cfg()).unwrap();
        assert_abs_diff_eq!(knots[1].0, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_travel_floors_at_min_step() {
        let series = vec![[1.0; 4], [1.0; 4], [1.0; 4]];
        let knots = allocate_times(&series, &cfg()).unwrap();
        assert_abs_diff_eq!(knots[1].0, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(knots[2].0, 0.02, epsilon = 1e-12);
    }

    #[test]
    fn single_sample_is_an_error() {
        assert!(matches!(
            allocate_times(&[[0.0; 4]], &cfg()),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn spline_passes_through_knots() {
        let knots = vec![
            (0.0, [0.0, 1.0, -2.0, 0.5]),
            (0.7, [1.0, 0.0, 3.0, 0.5]),
            (1.3, [-1.0, 2.0, 0.0, 0.5]),
            (2.0, [0.5, 0.5, 0.5, 0.5]),
        ];
        let traj = spline(&knots).unwrap();
        for (t, v) in &knots {
            let out = traj.eval(*t);
            for j in 0..4 {
                assert_abs_diff_eq!(out[j], v[j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_knots_interpolate_linearly() {
        let knots = vec![(0.0, [0.0; 4]), (2.0, [4.0, -4.0, 1.0, 0.0])];
        let traj = spline(&knots).unwrap();
        let mid = traj.eval(1.0);
        assert_abs_diff_eq!(mid[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mid[1], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mid[2], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn three_knot_closed_form() {
        // hand-evaluated basis at u = 1/2 with one-sided end tangents:
        // h00*p0 + h10*m0 + h01*p1 + h11*m1 = 0 + 0.125 + 0.5 - 0 = 0.625
        let knots = vec![(0.0, [0.0; 4]), (1.0, [1.0; 4]), (2.0, [0.0; 4])];
        let traj = spline(&knots).unwrap();
        assert_abs_diff_eq!(traj.eval(0.5)[0], 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.eval(1.5)[0], 0.625, epsilon = 1e-12);
    }

    #[test]
    fn queries_clamp_outside_domain() {
        let knots = vec![(0.0, [1.0; 4]), (1.0, [2.0; 4])];
        let traj = spline(&knots).unwrap();
        assert_eq!(traj.eval(-5.0), [1.0; 4]);
        assert_eq!(traj.eval(9.0), [2.0; 4]);
    }

    #[test]
    fn non_monotone_times_rejected() {
        let knots = vec![(0.0, [0.0; 4]), (1.0, [1.0; 4]), (1.0, [2.0; 4])];
        assert!(matches!(
            spline(&knots),
            Err(Error::NonMonotoneTime { index: 2 })
        ));
    }

    #[test]
    fn linear_ramp_emits_exact_allocation_duration() {
        // linear data has no overshoot, so no dilation is applied
        let series: Vec<[f64; 4]> = (0..6).map(|i| [i as f64 * 5.0; 4]).collect();
        let knots = allocate_times(&series, &cfg()).unwrap();
        let out = emit_commands(&series, &cfg()).unwrap();
        assert_abs_diff_eq!(out.duration, knots.last().unwrap().0, epsilon = 1e-12);
        out.verify(&cfg()).unwrap();
    }

    #[test]
    fn sampled_points_hit_scaled_knots() {
        let series: Vec<[f64; 4]> = (0..5).map(|i| [i as f64 * 2.0; 4]).collect();
        let c = cfg();
        let out = emit_commands(&series, &c).unwrap();
        let knots = allocate_times(&series, &c).unwrap();
        for (t, v) in &knots {
            // knot times are multiples of 0.1 s here, on the 100 Hz grid
            let idx = (t * c.control_rate).round() as usize;
            let sample = out.samples[idx];
            assert_abs_diff_eq!(sample.0, *t, epsilon = 1e-9);
            for (expected, got) in v.iter().zip(&sample.1) {
                assert_abs_diff_eq!(got, expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn doubling_walking_scale_doubles_duration_and_halves_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let series: Vec<[f64; 4]> = (0..30)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-20.0..20.0)))
            .collect();
        let base = emit_commands(&series, &cfg()).unwrap();
        let slow = emit_commands(
            &series,
            &PipelineConfig {
                walking_scale: 2.0,
                ..cfg()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(slow.duration, 2.0 * base.duration, epsilon = 1e-9);
        let ratio = slow.max_sampled_speed() / base.max_sampled_speed();
        assert!((0.45..=0.55).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn velocity_bound_holds_on_rough_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let series: Vec<[f64; 4]> = (0..15)
                .map(|_| std::array::from_fn(|_| rng.gen_range(-40.0..40.0)))
                .collect();
            let c = PipelineConfig {
                max_wire_speed: rng.gen_range(5.0..80.0),
                min_step_time: 0.01,
                control_rate: 100.0,
                walking_scale: rng.gen_range(1.0..3.0),
            };
            let out = emit_commands(&series, &c).unwrap();
            out.verify(&c).unwrap();
        }
    }

    #[test]
    fn finer_sampling_shrinks_jumps_tenfold() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let series: Vec<[f64; 4]> = (0..25)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-30.0..30.0)))
            .collect();
        let max_jump = |rate: f64| {
            let out = emit_commands(
                &series,
                &PipelineConfig {
                    control_rate: rate,
                    ..cfg()
                },
            )
            .unwrap();
            out.samples
                .windows(2)
                .flat_map(|w| (0..4).map(move |j| (w[1].1[j] - w[0].1[j]).abs()))
                .fold(0.0f64, f64::max)
        };
        let ratio = max_jump(100.0) / max_jump(1000.0);
        assert!((9.0..=11.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = PipelineConfig {
            walking_scale: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig {
            max_wire_speed: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
