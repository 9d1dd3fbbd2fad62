//! CSV, JSON and SVG emission.
//!
//! CSV output is the stable machine interface: '.' decimal point, comma
//! separator, one header row, LF line endings, floats printed with Rust's
//! shortest round-trip formatting so files are bit-stable across runs.
//! The SVG plots are conveniences for eyeballing traces, nothing more.

use std::fmt::Write as _;

use nalgebra::Isometry3;
use serde::Serialize;

use crate::chain::ComparisonRow;
use crate::gait::GaitPlan;
use crate::optimize::{
    check_constraints, objective, reference_candidate, ConstraintReport, DesignProblem,
    DesignSolution,
};
use crate::pipeline::CommandSeries;
use crate::tendon::TendonJacobian;

pub fn plan_csv(plan: &GaitPlan) -> String {
    let mut out = String::new();
    out.push_str(
        "sample,phase,rf_q1,rf_q2,rb_q1,rb_q2,lf_q1,lf_q2,lb_q1,lb_q2,\
         rf_x,rf_y,rb_x,rb_y,lf_x,lf_y,lb_x,lb_y,right_w1,right_w2,left_w1,left_w2\n",
    );
    for i in 0..plan.samples() {
        let phase = if plan.right_front_in_stance(i) {
            "A"
        } else {
            "B"
        };
        let q = [
            plan.right_front.joints[i],
            plan.right_back.joints[i],
            plan.left_front.joints[i],
            plan.left_back.joints[i],
        ];
        let f = [
            plan.right_front.feet[i],
            plan.right_back.feet[i],
            plan.left_front.feet[i],
            plan.left_back.feet[i],
        ];
        let _ = write!(out, "{i},{phase}");
        for leg in q {
            let _ = write!(out, ",{},{}", leg.q1, leg.q2);
        }
        for leg in f {
            let _ = write!(out, ",{},{}", leg.x, leg.y);
        }
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            plan.right_wires[i][0],
            plan.right_wires[i][1],
            plan.left_wires[i][0],
            plan.left_wires[i][1]
        );
    }
    out
}

pub fn plan_json(plan: &GaitPlan) -> String {
    serde_json::to_string_pretty(plan).expect("plan serializes")
}

pub fn commands_csv(series: &CommandSeries) -> String {
    let mut out = String::from("t,l1,l2,l3,l4\n");
    for (t, l) in &series.samples {
        let _ = writeln!(out, "{t},{},{},{},{}", l[0], l[1], l[2], l[3]);
    }
    out
}

pub fn efficiency_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("bend_rad,chain_min,chain_max,tsm_min,tsm_max\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.bend, r.chain_min, r.chain_max, r.tsm_min, r.tsm_max
        );
    }
    out
}

/// One result row of a chain simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct ChainRow {
    pub index: usize,
    pub status: String,
    pub path_length: Option<f64>,
    pub cumulative_bend: Option<f64>,
    pub tip: Option<[f64; 7]>, // x y z qw qx qy qz
    pub chain_efficiency: [f64; 2],
    pub tsm_efficiency: Option<[f64; 2]>,
}

pub fn chain_csv(rows: &[ChainRow]) -> String {
    let mut out = String::from(
        "index,status,path_length_mm,cumulative_bend_rad,tip_x,tip_y,tip_z,tip_qw,tip_qx,tip_qy,tip_qz,\
         chain_eff_min,chain_eff_max,tsm_eff_min,tsm_eff_max\n",
    );
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in rows {
        let tip = r.tip.unwrap_or([f64::NAN; 7]);
        let tip_cols: Vec<String> = if r.tip.is_some() {
            tip.iter().map(|v| v.to_string()).collect()
        } else {
            vec![String::new(); 7]
        };
        let tsm = r
            .tsm_efficiency
            .map_or((String::new(), String::new()), |b| {
                (b[0].to_string(), b[1].to_string())
            });
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.index,
            r.status,
            opt(r.path_length),
            opt(r.cumulative_bend),
            tip_cols.join(","),
            r.chain_efficiency[0],
            r.chain_efficiency[1],
            tsm.0,
            tsm.1
        );
    }
    out
}

pub fn tip_pose_row(pose: &Isometry3<f64>) -> [f64; 7] {
    let t = pose.translation.vector;
    let q = pose.rotation;
    [t.x, t.y, t.z, q.w, q.i, q.j, q.k]
}

#[derive(Debug, Serialize)]
struct JacobianDoc {
    g: [[f64; 2]; 2],
    q0: [f64; 2],
}

impl From<&TendonJacobian> for JacobianDoc {
    fn from(t: &TendonJacobian) -> Self {
        Self {
            g: [[t.g[(0, 0)], t.g[(0, 1)]], [t.g[(1, 0)], t.g[(1, 1)]]],
            q0: [t.q0.x, t.q0.y],
        }
    }
}

#[derive(Debug, Serialize)]
struct CandidateDoc {
    front: JacobianDoc,
    back: JacobianDoc,
    objective: f64,
    feasible: bool,
    constraints: ConstraintReport,
}

#[derive(Debug, Serialize)]
struct SolutionDoc {
    seed: u64,
    starts: usize,
    solution: CandidateDoc,
    reference: CandidateDoc,
    /// Solution objective minus reference objective; at most the
    /// feasibility tolerance when the gate holds.
    objective_gap: f64,
    dominates_reference: bool,
}

/// Full optimizer report including the comparison against the stored
/// reference design evaluated on the same problem instance.
pub fn solution_report_json(
    problem: &DesignProblem,
    solution: &DesignSolution,
    seed: u64,
) -> String {
    let reference = reference_candidate();
    let ref_objective = objective(problem, &reference);
    let ref_report = check_constraints(problem, &reference);
    let doc = SolutionDoc {
        seed,
        starts: solution.starts_used,
        solution: CandidateDoc {
            front: (&solution.front).into(),
            back: (&solution.back).into(),
            objective: solution.objective,
            feasible: solution.constraint_report.feasible(),
            constraints: solution.constraint_report.clone(),
        },
        reference: CandidateDoc {
            front: (&reference.front).into(),
            back: (&reference.back).into(),
            objective: ref_objective,
            feasible: ref_report.feasible(),
            constraints: ref_report,
        },
        objective_gap: solution.objective - ref_objective,
        dominates_reference: solution.objective <= ref_objective + 1e-6,
    };
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

fn svg_header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         width=\"{width}\" height=\"{height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Foot traces of all four legs with the ground line.
pub fn foot_traces_svg(plan: &GaitPlan) -> String {
    let (w, h, margin) = (640.0, 480.0, 40.0);
    let feet: Vec<&crate::leg::FootPosition> = [
        &plan.right_front.feet,
        &plan.right_back.feet,
        &plan.left_front.feet,
        &plan.left_back.feet,
    ]
    .into_iter()
    .flatten()
    .collect();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for f in &feet {
        x_lo = x_lo.min(f.x);
        x_hi = x_hi.max(f.x);
        y_lo = y_lo.min(f.y);
        y_hi = y_hi.max(f.y);
    }
    y_lo = y_lo.min(-plan.params.ground_offset);
    let sx = (w - 2.0 * margin) / (x_hi - x_lo).max(1e-9);
    let sy = (h - 2.0 * margin) / (y_hi - y_lo).max(1e-9);
    let map =
        |f: &crate::leg::FootPosition| (margin + (f.x - x_lo) * sx, h - margin - (f.y - y_lo) * sy);

    let mut out = svg_header(w, h);
    let gy = h - margin - (-plan.params.ground_offset - y_lo) * sy;
    let _ = writeln!(
        out,
        "<line x1=\"0\" y1=\"{gy:.2}\" x2=\"{w}\" y2=\"{gy:.2}\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>"
    );
    for (trace, color) in [
        (&plan.right_front, "crimson"),
        (&plan.right_back, "royalblue"),
        (&plan.left_front, "darkorange"),
        (&plan.left_back, "seagreen"),
    ] {
        let pts: Vec<(f64, f64)> = trace.feet.iter().map(map).collect();
        out.push_str(&polyline(&pts, color));
    }
    out.push_str("</svg>\n");
    out
}

/// Efficiency bands against cumulative bend: constant chain band, decaying
/// sheath band.
pub fn efficiency_svg(rows: &[ComparisonRow]) -> String {
    let (w, h, margin) = (640.0, 480.0, 40.0);
    let b_hi = rows.last().map_or(1.0, |r| r.bend).max(1e-9);
    let map = |bend: f64, eff: f64| {
        (
            margin + bend / b_hi * (w - 2.0 * margin),
            h - margin - eff * (h - 2.0 * margin),
        )
    };
    let mut out = svg_header(w, h);
    for (curve, color) in [
        (
            rows.iter()
                .map(|r| map(r.bend, r.chain_min))
                .collect::<Vec<_>>(),
            "seagreen",
        ),
        (
            rows.iter()
                .map(|r| map(r.bend, r.chain_max))
                .collect::<Vec<_>>(),
            "seagreen",
        ),
        (
            rows.iter()
                .map(|r| map(r.bend, r.tsm_min))
                .collect::<Vec<_>>(),
            "crimson",
        ),
        (
            rows.iter()
                .map(|r| map(r.bend, r.tsm_max))
                .collect::<Vec<_>>(),
            "crimson",
        ),
    ] {
        out.push_str(&polyline(&curve, color));
    }
    out.push_str("</svg>\n");
    out
}
