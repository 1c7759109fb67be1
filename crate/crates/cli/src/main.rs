mod file;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rigidity_core::affine::{apply_perturbation, flex_framework, PerturbationMap};
use rigidity_core::certify::{analyze, is_super_stable, AnalysisReport, SuperStabilityCertificate};
use rigidity_core::conic::conic_space;
use rigidity_core::gallery::{self, GallerySpec};
use rigidity_core::operations::{
    cone, default_slicing_hyperplane, projective_transform, slice, slide_to_flat, ConeFramework,
    ProjectiveTransform,
};
use rigidity_core::{Framework, Tolerance};

use crate::file::{read_framework, FrameworkFile};

#[derive(Parser)]
#[command(
    name = "rigidity",
    version,
    about = "Stress, conic and super-stability analysis of bar frameworks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Also draw the resulting framework as SVG.
    #[arg(long, global = true, value_name = "PATH")]
    emit_svg: Option<PathBuf>,

    /// Report format for `analyze` and `certify`.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    report: ReportFormat,

    /// Relative cutoff for every rank decision.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for the randomized stress search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write output here instead of stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis report.
    Analyze { file: PathBuf },
    /// Super-stability certificate.
    Certify { file: PathBuf },
    /// Apply the affine flex along the first conic at infinity.
    Flex {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Apply x ↦ x + (xᵀQx) v for the first conic Q at infinity.
    Perturb {
        file: PathBuf,
        /// Comma-separated direction vector.
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
    /// Cone over the framework; the apex becomes vertex 0.
    Cone {
        file: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        height: f64,
    },
    /// Slice a cone framework (apex = vertex 0), sliding it flat first if needed.
    Slice { file: PathBuf },
    /// Apply a projective transform given as a row-major (d+1)×(d+1) matrix.
    Transform {
        file: PathBuf,
        /// Comma-separated entries.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Write a gallery framework.
    Gallery {
        name: String,
        /// Generator parameter, e.g. `k=3`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim_start_matches("error: ").trim());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {s:?}"))
        })
        .collect()
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_svg(cli: &Cli, f: &Framework) -> Result<(), String> {
    if let Some(path) = &cli.emit_svg {
        fs::write(path, svg::render(f))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn emit_framework(cli: &Cli, f: &Framework) -> Result<(), String> {
    emit_svg(cli, f)?;
    let mut json = FrameworkFile::from_framework(f).to_json();
    json.push('\n');
    emit(cli, &json)
}

fn first_conic(f: &Framework, tol: &Tolerance) -> Result<rigidity_core::conic::ConicForm, String> {
    conic_space(f, tol)
        .map_err(|e| e.to_string())?
        .into_iter()
        .next()
        .ok_or_else(|| "edge directions lie on no conic at infinity".to_string())
}

fn run(cli: &Cli) -> Result<(), String> {
    let tol = Tolerance::relative(cli.tol).map_err(|e| e.to_string())?;
    let load = |p: &Path| read_framework(p, &tol);
    let err = |e: rigidity_core::Error| e.to_string();
    match &cli.command {
        Command::Analyze { file } => {
            let f = load(file)?;
            emit_svg(cli, &f)?;
            let report = analyze(&f, cli.seed, &tol).map_err(err)?;
            emit(cli, &render(cli.report, &report, text_report))
        }
        Command::Certify { file } => {
            let f = load(file)?;
            emit_svg(cli, &f)?;
            let cert = is_super_stable(&f, cli.seed, &tol).map_err(err)?;
            emit(cli, &render(cli.report, &cert, text_certificate))
        }
        Command::Flex { file, t } => {
            let f = load(file)?;
            let q = first_conic(&f, &tol)?;
            emit_framework(cli, &flex_framework(&f, &q, *t, &tol).map_err(err)?)
        }
        Command::Perturb { file, v } => {
            let f = load(file)?;
            let v = DVector::from_vec(parse_numbers(v)?);
            if v.len() != f.dimension() {
                return Err(format!(
                    "--v needs {} components, got {}",
                    f.dimension(),
                    v.len()
                ));
            }
            let m = PerturbationMap::from_conic(&first_conic(&f, &tol)?, v).map_err(err)?;
            let image = apply_perturbation(&m, f.config(), &tol).map_err(err)?;
            emit_framework(cli, &f.with_configuration(image).map_err(err)?)
        }
        Command::Cone { file, height } => {
            let f = load(file)?;
            emit_framework(cli, cone(&f, *height).map_err(err)?.framework())
        }
        Command::Slice { file } => {
            let cf = ConeFramework::new(load(file)?).map_err(err)?;
            let sliced = match slice(&cf, &tol) {
                Ok(f) => f,
                Err(rigidity_core::Error::NotFlat) => {
                    let plane = default_slicing_hyperplane(&cf);
                    let (flat, _) = slide_to_flat(&cf, &plane, &tol).map_err(err)?;
                    slice(&flat, &tol).map_err(err)?
                }
                Err(e) => return Err(e.to_string()),
            };
            emit_framework(cli, &sliced)
        }
        Command::Transform { file, matrix } => {
            let f = load(file)?;
            let entries = parse_numbers(matrix)?;
            let size = f.dimension() + 1;
            if entries.len() != size * size {
                return Err(format!(
                    "--matrix needs {} entries, got {}",
                    size * size,
                    entries.len()
                ));
            }
            let h = ProjectiveTransform::new(DMatrix::from_row_slice(size, size, &entries), &tol)
                .map_err(err)?;
            emit_framework(cli, &projective_transform(&f, &h, &tol).map_err(err)?)
        }
        Command::Gallery { name, params } => {
            let mut spec = GallerySpec::new(name);
            for p in params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| format!("parameter {p:?} is not KEY=VALUE"))?;
                spec.parameters
                    .insert(k.trim().to_string(), v.trim().to_string());
            }
            emit_framework(cli, &gallery::generate(&spec).map_err(err)?)
        }
    }
}

fn render<T: serde::Serialize>(format: ReportFormat, value: &T, text: fn(&T) -> String) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
            s.push('\n');
            s
        }
        ReportFormat::Text => text(value),
    }
}

fn text_certificate(c: &SuperStabilityCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "verdict: {}",
        serde_json::to_value(c.verdict)
            .unwrap()
            .as_str()
            .unwrap_or("?")
    );
    let _ = writeln!(
        s,
        "witness rank: {} (target {})",
        c.stress_rank, c.target_rank
    );
    if let Some(ev) = &c.witness_eigenvalues {
        let shown: Vec<String> = ev.iter().map(|x| format!("{x:.3e}")).collect();
        let _ = writeln!(s, "witness spectrum: [{}]", shown.join(", "));
    }
    if let Some(q) = &c.witness_conic {
        let _ = writeln!(
            s,
            "conic at infinity: {}",
            q.matrix()
                .row_iter()
                .map(|r| format!("{:.6?}", r.iter().collect::<Vec<_>>()))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    s
}

fn text_report(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "vertices {}, edges {}, dimension {}",
        r.vertex_count, r.edge_count, r.dimension
    );
    let _ = writeln!(
        s,
        "has_conic: {} (dimension {})",
        r.has_conic, r.conic_space_dim
    );
    let _ = writeln!(
        s,
        "is_ruled: {} (dimension {})",
        r.is_ruled, r.ruling_space_dim
    );
    let _ = writeln!(s, "is_nar: {}", r.is_nar);
    let _ = writeln!(s, "stress space dimension: {}", r.stress_space_dim);
    let _ = writeln!(s, "generic stress rank: {}", r.max_generic_stress_rank);
    match r.psd_stress_rank {
        Some(k) => {
            let _ = writeln!(s, "psd stress rank: {k}");
        }
        None => s.push_str("psd stress rank: none\n"),
    }
    let sap = match r.sap.as_bool() {
        Some(true) => "holds",
        Some(false) => "fails",
        None => "not applicable",
    };
    let _ = writeln!(s, "sap: {sap}");
    s.push_str(&text_certificate(&r.super_stability));
    for f in &r.consistency_flags {
        let state = match (f.applicable, f.passed) {
            (false, _) => "n/a",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        let _ = writeln!(s, "check {}: {state}", f.name);
    }
    s
}
