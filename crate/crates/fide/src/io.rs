//! CSV and JSON emission with stable column layouts.
//!
//! Column layouts are part of the CLI contract:
//!
//! * convergence: `h,err_endpoint,err_global,order_endpoint,order_global,picard_iters,wall_s`
//! * stability locus: `theta,re_hhat,im_hhat`
//! * trajectory: `t,u_1,…,u_d`
//! * timing: `n,fast_s,ref_s`
//!
//! Floats are written in shortest round-trip form, so identical runs
//! produce byte-identical files apart from the wall-time columns. Order
//! cells are empty where no coarser row exists. When a CSV file is
//! requested, a `<stem>.config.json` sidecar ([`sidecar_path`]) records the
//! resolved configuration ([`RunManifest`]) so the run can be reproduced
//! from the output directory alone; JSON outputs embed the same manifest
//! instead.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use fide_core::stability::BoundaryLocus;
use fide_core::stepper::Trajectory;

use crate::runner::{ConvergenceRow, RunSettings, TimingRow};

/// Resolved run configuration, written as the JSON sidecar of every CSV
/// output and embedded in every JSON output.
///
/// Only fields relevant to the command are present; the rest serialize as
/// absent.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// Subcommand that produced the output.
    pub command: String,
    /// Fractional order.
    pub alpha: f64,
    /// Interpolation degree.
    pub p: usize,
    /// Problem key, for solver commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    /// Scheme family (`famm` or `imex`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// Integration horizon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Correction powers for the solution families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_u: Option<Vec<f64>>,
    /// Correction powers for the history families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_hist: Option<Vec<f64>>,
    /// Correction powers for the force families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_f: Option<Vec<f64>>,
    /// Correction powers for the extrapolation families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_ex: Option<Vec<f64>>,
    /// Picard tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard_tol: Option<f64>,
    /// Picard sweep cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard_max: Option<usize>,
    /// Epsilon-circulant parameter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Gauss–Jacobi quadrature points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_points: Option<usize>,
    /// Step sizes of a solve or convergence run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    /// Grid sizes of a timing run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Repeats per timing measurement.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
    /// Reference-solver cutoff of a timing run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ref_n: Option<usize>,
    /// Explicit-to-implicit ratio of a stability query.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Lag truncation of a stability query.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_trunc: Option<usize>,
    /// Circle samples of a stability query.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
}

impl RunManifest {
    /// Manifest skeleton for a command; solver fields start absent.
    pub fn new(command: &str, alpha: f64, p: usize) -> Self {
        RunManifest {
            command: command.to_owned(),
            alpha,
            p,
            problem: None,
            scheme: None,
            t_end: None,
            sigma_u: None,
            sigma_hist: None,
            delta_f: None,
            delta_ex: None,
            picard_tol: None,
            picard_max: None,
            eps: None,
            quad_points: None,
            h_list: None,
            n_list: None,
            repeats: None,
            max_ref_n: None,
            kappa: None,
            k_trunc: None,
            n_samples: None,
        }
    }

    /// Manifest for a solver command with resolved settings.
    pub fn for_solver(command: &str, problem: &str, settings: &RunSettings) -> Self {
        let mut manifest = RunManifest::new(command, settings.alpha, settings.p);
        manifest.problem = Some(problem.to_owned());
        manifest.scheme = Some(
            match settings.scheme {
                fide_core::stepper::Scheme::Famm => "famm",
                fide_core::stepper::Scheme::Imex => "imex",
            }
            .to_owned(),
        );
        manifest.t_end = Some(settings.t_end);
        manifest.sigma_u = Some(settings.plan.sigma_u().to_vec());
        manifest.sigma_hist = Some(settings.plan.sigma_hist().to_vec());
        manifest.delta_f = Some(settings.plan.delta_f().to_vec());
        manifest.delta_ex = Some(settings.plan.delta_ex().to_vec());
        manifest.picard_tol = Some(settings.picard_tol);
        manifest.picard_max = Some(settings.picard_max);
        manifest.eps = Some(settings.eps);
        manifest.quad_points = Some(settings.quad_points);
        manifest
    }
}

/// Convergence output: manifest plus measured rows.
#[derive(Debug, Serialize)]
pub struct ConvergenceDoc<'a> {
    /// Resolved configuration.
    pub config: &'a RunManifest,
    /// Ladder rows, coarsest first.
    pub rows: &'a [ConvergenceRow],
}

/// Timing output: manifest plus measured rows.
#[derive(Debug, Serialize)]
pub struct TimingDoc<'a> {
    /// Resolved configuration.
    pub config: &'a RunManifest,
    /// Grid rows, smallest first.
    pub rows: &'a [TimingRow],
}

/// Trajectory output: manifest plus grid and states.
#[derive(Debug, Serialize)]
pub struct TrajectoryDoc<'a> {
    /// Resolved configuration.
    pub config: &'a RunManifest,
    /// Time grid `t_k = k h`.
    pub t: &'a [f64],
    /// State per grid point.
    pub u: Vec<&'a [f64]>,
}

impl<'a> TrajectoryDoc<'a> {
    /// Packs a trajectory for JSON emission.
    pub fn new(config: &'a RunManifest, trajectory: &'a Trajectory) -> Self {
        TrajectoryDoc {
            config,
            t: trajectory.times(),
            u: (0..=trajectory.n_steps()).map(|k| trajectory.state(k)).collect(),
        }
    }
}

/// One sampled point of a stability boundary.
#[derive(Debug, Serialize)]
pub struct StabilitySample {
    /// Circle angle in `[0, 2π)`.
    pub theta: f64,
    /// Real part of the boundary point.
    pub re_hhat: f64,
    /// Imaginary part of the boundary point.
    pub im_hhat: f64,
}

/// Stability output: manifest, locus diagnostics, and samples.
#[derive(Debug, Serialize)]
pub struct StabilityDoc<'a> {
    /// Resolved configuration.
    pub config: &'a RunManifest,
    /// Map poles inside the unit circle (winding reference).
    pub poles_inside: usize,
    /// Whether the winding test is unusable (pole on the circle or
    /// non-finite samples).
    pub degenerate: bool,
    /// Whether the sampled boundary crosses itself.
    pub self_intersecting: bool,
    /// Sampled boundary, by increasing angle.
    pub samples: Vec<StabilitySample>,
}

impl<'a> StabilityDoc<'a> {
    /// Packs a boundary locus for JSON emission.
    pub fn new(config: &'a RunManifest, locus: &BoundaryLocus) -> Self {
        StabilityDoc {
            config,
            poles_inside: locus.poles_inside(),
            degenerate: locus.is_degenerate(),
            self_intersecting: locus.is_self_intersecting(),
            samples: samples_of(locus),
        }
    }
}

fn samples_of(locus: &BoundaryLocus) -> Vec<StabilitySample> {
    locus
        .h_hat()
        .iter()
        .enumerate()
        .map(|(m, v)| StabilitySample {
            theta: locus.theta(m),
            re_hhat: v.re,
            im_hhat: v.im,
        })
        .collect()
}

/// Shortest round-trip scientific form (`0` stays `0`).
fn sci(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else {
        format!("{v:e}")
    }
}

/// Writes the convergence CSV
/// (`h,err_endpoint,err_global,order_endpoint,order_global,picard_iters,wall_s`).
pub fn write_convergence_csv(out: &mut dyn Write, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(out, "h,err_endpoint,err_global,order_endpoint,order_global,picard_iters,wall_s")?;
    for row in rows {
        let oe = row.order_endpoint.map(|o| format!("{o:.4}")).unwrap_or_default();
        let og = row.order_global.map(|o| format!("{o:.4}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6}",
            row.h,
            sci(row.err_endpoint),
            sci(row.err_global),
            oe,
            og,
            row.picard_iters,
            row.wall_s
        )?;
    }
    Ok(())
}

/// Writes the stability-locus CSV (`theta,re_hhat,im_hhat`).
pub fn write_stability_csv(out: &mut dyn Write, locus: &BoundaryLocus) -> Result<()> {
    writeln!(out, "theta,re_hhat,im_hhat")?;
    for sample in samples_of(locus) {
        writeln!(out, "{},{},{}", sci(sample.theta), sci(sample.re_hhat), sci(sample.im_hhat))?;
    }
    Ok(())
}

/// Writes the trajectory CSV (`t,u_1,…,u_d`).
pub fn write_trajectory_csv(out: &mut dyn Write, trajectory: &Trajectory) -> Result<()> {
    let d = trajectory.dim();
    write!(out, "t")?;
    for i in 1..=d {
        write!(out, ",u_{i}")?;
    }
    writeln!(out)?;
    for (k, &t) in trajectory.times().iter().enumerate() {
        write!(out, "{t}")?;
        for &v in trajectory.state(k) {
            write!(out, ",{}", sci(v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes the timing CSV (`n,fast_s,ref_s`; the reference cell is empty
/// above the cutoff).
pub fn write_timing_csv(out: &mut dyn Write, rows: &[TimingRow]) -> Result<()> {
    writeln!(out, "n,fast_s,ref_s")?;
    for row in rows {
        let r = row.reference_s.map(|s| format!("{s:.6}")).unwrap_or_default();
        writeln!(out, "{},{:.6},{}", row.n, row.fast_s, r)?;
    }
    Ok(())
}

/// Writes any document as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).context("serializing JSON")?;
    writeln!(out)?;
    Ok(())
}

/// Sidecar path of a CSV output: the extension becomes `config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

/// Writes the manifest sidecar next to a CSV output.
pub fn write_sidecar(out: &Path, manifest: &RunManifest) -> Result<()> {
    let path = sidecar_path(out);
    let mut file = std::fs::File::create(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    write_json(&mut file, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<ConvergenceRow> {
        vec![
            ConvergenceRow {
                h: 0.125,
                err_endpoint: 5.2795e-3,
                err_global: 6.1e-3,
                order_endpoint: None,
                order_global: None,
                picard_iters: 3,
                wall_s: 0.001,
            },
            ConvergenceRow {
                h: 0.0625,
                err_endpoint: 2.6031e-3,
                err_global: 3.0e-3,
                order_endpoint: Some(1.0202),
                order_global: Some(1.0),
                picard_iters: 3,
                wall_s: 0.002,
            },
        ]
    }

    #[test]
    fn convergence_csv_layout_is_stable() {
        let mut buf = Vec::new();
        write_convergence_csv(&mut buf, &sample_rows()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "h,err_endpoint,err_global,order_endpoint,order_global,picard_iters,wall_s"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("0.125,5.2795e-3,6.1e-3,,,3,"), "{first}");
        let second = lines.next().unwrap();
        assert!(second.starts_with("0.0625,2.6031e-3,3e-3,1.0202,1.0000,3,"), "{second}");
        assert!(lines.next().is_none());
    }

    #[test]
    fn csv_bytes_are_deterministic_apart_from_timing() {
        let rows = sample_rows();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_convergence_csv(&mut a, &rows).unwrap();
        write_convergence_csv(&mut b, &rows).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sidecar_path_swaps_the_extension() {
        assert_eq!(
            sidecar_path(Path::new("runs/table1.csv")),
            PathBuf::from("runs/table1.config.json")
        );
        assert_eq!(sidecar_path(Path::new("out")), PathBuf::from("out.config.json"));
    }

    #[test]
    fn manifests_skip_absent_fields() {
        let manifest = RunManifest::new("stability", 0.5, 0);
        let text = serde_json::to_string(&manifest).unwrap();
        assert!(text.contains("\"command\":\"stability\""));
        assert!(!text.contains("picard_tol"));
        assert!(!text.contains("h_list"));
    }

    #[test]
    fn timing_csv_leaves_the_reference_cell_empty_after_cutoff() {
        let rows = vec![
            TimingRow { n: 4096, fast_s: 0.002, reference_s: Some(0.05) },
            TimingRow { n: 16384, fast_s: 0.008, reference_s: None },
        ];
        let mut buf = Vec::new();
        write_timing_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n,fast_s,ref_s");
        assert_eq!(lines.next().unwrap(), "4096,0.002000,0.050000");
        assert_eq!(lines.next().unwrap(), "16384,0.008000,");
    }
}
