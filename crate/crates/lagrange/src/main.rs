//! Command-line surface: per-point classification, mass-space sweeps,
//! normal-form tables, orbit integration, resonance queries, and the
//! Sun-Jupiter / Earth-Moon report.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use lagrange::classifier::{
    convexity_class, diophantine_scan, nearest_resonant_beta,
    region_membership, resonances_up_to, split_masses, steepness_radius, ConvexityClass,
    DiophantineVerdict, RegionMembership, ResonanceHit,
};
use lagrange::dynamics::{integrate, ReducedState, ReducedSystem};
use lagrange::hamiltonian::MassParameters;
use lagrange::linear_stability::{
    build_variational, spectral_verdict, VariationalKind,
};
use lagrange::nbody::{analyze_central_config, equilateral_configuration, Masses};
use lagrange::normal_form::{birkhoff_normal_form, closed_form_omegas};
use lagrange::Result;

#[derive(Parser)]
#[command(name = "lagrange", version, about = "Stability toolkit for the Lagrange relative equilibrium", disable_help_subcommand = true)]
struct Cli {
    /// Seed for sampling-based self-tests; deterministic commands ignore it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PointArgs {
    /// Mass triple m1,m2,m3 (normalized to total 1).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["beta", "m1"])]
    masses: Option<Vec<f64>>,
    /// Symmetric mass product beta = m1 m2 + m2 m3 + m3 m1.
    #[arg(long, requires = "m1")]
    beta: Option<f64>,
    /// Dominant mass; combined with --beta determines the triple.
    #[arg(long, requires = "beta")]
    m1: Option<f64>,
}

impl PointArgs {
    fn masses(&self) -> Result<Masses> {
        match (&self.masses, self.beta, self.m1) {
            (Some(v), _, _) => Masses::normalized(v.clone()),
            (None, Some(beta), Some(m1)) => split_masses(beta, m1),
            _ => Err(lagrange::Error::OutOfRegion {
                region: "input (give --masses or --beta with --m1)",
            }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full stability report for one mass triple, as JSON.
    Classify {
        #[command(flatten)]
        point: PointArgs,
        /// Largest resonance order to list.
        #[arg(long, default_value_t = 4)]
        max_order: u32,
        /// Diophantine constant c in |<k,w>| >= c / |k|^upsilon.
        #[arg(long, default_value_t = 1e-3)]
        diophantine_c: f64,
        /// Diophantine exponent upsilon.
        #[arg(long, default_value_t = 7.0)]
        diophantine_upsilon: f64,
        /// Largest order scanned for the Diophantine margin.
        #[arg(long, default_value_t = 20)]
        diophantine_order: u32,
    },
    /// Grid sweep of the (mu, y) mass chart, as CSV.
    Sweep {
        /// Cells per axis.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        /// Lower end of the mu = 1 - m1 range.
        #[arg(long, default_value_t = 0.0)]
        mu_min: f64,
        /// Upper end of the mu range.
        #[arg(long, default_value_t = 1.0)]
        mu_max: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<String>,
    },
    /// Twist-coefficient table of the degree-4 normal form, as JSON.
    Normalform {
        #[command(flatten)]
        point: PointArgs,
        /// Also run the normalization pipeline and report the deviation.
        #[arg(long)]
        verify: bool,
    },
    /// Integrate the reduced equations of motion, as CSV.
    Integrate {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 0.0)]
        z5: f64,
        #[arg(long, default_value_t = 0.0)]
        z6: f64,
        #[arg(long, default_value_t = 0.0, name = "Z5")]
        zdot5: f64,
        #[arg(long, default_value_t = 0.0, name = "Z6")]
        zdot6: f64,
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        #[arg(long, default_value_t = 0.0)]
        upsilon: f64,
        /// Integration span; negative runs backwards.
        #[arg(long, default_value_t = 100.0)]
        t_span: f64,
        /// Local error per unit time.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        output: Option<String>,
    },
    /// Frequency combinations with small residual, as JSON.
    Resonances {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 4)]
        max_order: u32,
        /// Residual threshold relative to the fast frequency.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Resonance and convexity report for Sun-Jupiter and Earth-Moon.
    ReportSystems {
        /// Largest resonance order scanned for the nearest resonant beta;
        /// by default each system uses its published order (48 and 21).
        #[arg(long)]
        max_order: Option<u32>,
    },
}

#[derive(Serialize)]
struct SpectralSummary {
    spectrally_stable: bool,
    linearly_stable: bool,
    max_real_part: f64,
    eigenvalue_imag_parts: Vec<f64>,
}

#[derive(Serialize)]
struct StabilityReport {
    masses: [f64; 3],
    beta: f64,
    m1: f64,
    spectral: SpectralSummary,
    regions: RegionMembership,
    resonances: Vec<ResonanceHit>,
    f_deg_sign: i8,
    f_isodeg_sign: i8,
    #[serde(skip_serializing_if = "Option::is_none")]
    convexity_class: Option<ConvexityClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steepness_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diophantine: Option<DiophantineVerdict>,
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn classify(
    m: &Masses,
    max_order: u32,
    dio_c: f64,
    dio_upsilon: f64,
    dio_order: u32,
) -> Result<StabilityReport> {
    let r = equilateral_configuration(m)?;
    let a = analyze_central_config(&r, m)?;
    let vm = build_variational(&a, a.omega(), VariationalKind::MomentumReduced)?;
    let v = spectral_verdict(&vm)?;
    let mp = MassParameters::new(m)?;
    let regions = region_membership(&mp);

    let mut resonances = Vec::new();
    let mut convexity = None;
    let mut steepness = None;
    let mut diophantine = None;
    if let Ok(fs) = mp.frequencies() {
        resonances = resonances_up_to(&fs, max_order, 1e-9 * fs.omega0);
        diophantine = Some(diophantine_scan(&fs, dio_c, dio_upsilon, dio_order));
        if regions.in_omega_ps {
            let w = closed_form_omegas(&mp)?;
            convexity = Some(convexity_class(&w, &fs)?);
            steepness = Some(steepness_radius(&mp)?);
        }
    }

    Ok(StabilityReport {
        masses: [mp.m1, mp.m2, mp.m3],
        beta: mp.beta,
        m1: mp.m1,
        spectral: SpectralSummary {
            spectrally_stable: v.spectrally_stable,
            linearly_stable: v.linearly_stable,
            max_real_part: v.max_real_part,
            eigenvalue_imag_parts: v.eigenvalues.iter().map(|e| e.im).collect(),
        },
        regions,
        resonances,
        f_deg_sign: sign_of(lagrange::classifier::f_deg(mp.beta, mp.m1)),
        f_isodeg_sign: sign_of(lagrange::classifier::f_isodeg(mp.beta, mp.m1)),
        convexity_class: convexity,
        steepness_radius: steepness,
        diophantine,
    })
}

fn sweep_csv(resolution: usize, mu_min: f64, mu_max: f64) -> String {
    let header = "mu,y,beta,m1,in_omega,in_omega_ss,in_omega_ps,in_omega_qc,in_omega_dqc,\
                  f_deg_sign,f_isodeg_sign,convexity_class\n";
    let n = resolution;
    let rows: Vec<String> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mu = mu_min + (mu_max - mu_min) * (i as f64 + 0.5) / n as f64;
            let m1 = 1.0 - mu;
            let mut out = String::new();
            for j in 0..n {
                // The admissible y window at this mu: positive mass splits.
                let y = (1.0 - mu) + (mu / 4.0) * (j as f64 + 0.5) / n as f64;
                let beta = y * mu;
                let row = sweep_cell(mu, y, beta, m1);
                out.push_str(&row);
            }
            out
        })
        .collect();
    let mut csv = String::from(header);
    for r in rows {
        csv.push_str(&r);
    }
    csv
}

fn sweep_cell(mu: f64, y: f64, beta: f64, m1: f64) -> String {
    let fd = lagrange::classifier::f_deg(beta, m1);
    let fi = lagrange::classifier::f_isodeg(beta, m1);
    let (regions, class) = match split_masses(beta, m1).and_then(|m| MassParameters::new(&m)) {
        Ok(mp) => {
            let regions = region_membership(&mp);
            let class = if regions.in_omega_ps {
                mp.frequencies()
                    .and_then(|fs| Ok((closed_form_omegas(&mp)?, fs)))
                    .and_then(|(w, fs)| convexity_class(&w, &fs))
                    .map(class_label)
                    .unwrap_or("-")
            } else {
                "-"
            };
            (regions, class)
        }
        Err(_) => (
            RegionMembership {
                in_omega: false,
                in_omega_ss: false,
                in_omega_ps: false,
                in_omega_qc: false,
                in_omega_dqc: false,
            },
            "-",
        ),
    };
    format!(
        "{mu:.16e},{y:.16e},{beta:.16e},{m1:.16e},{},{},{},{},{},{},{},{}\n",
        regions.in_omega as u8,
        regions.in_omega_ss as u8,
        regions.in_omega_ps as u8,
        regions.in_omega_qc as u8,
        regions.in_omega_dqc as u8,
        sign_of(fd),
        sign_of(fi),
        class
    )
}

fn class_label(c: ConvexityClass) -> &'static str {
    match c {
        ConvexityClass::Convex => "convex",
        ConvexityClass::QuasiConvex => "quasi_convex",
        ConvexityClass::DirectionallyQuasiConvex => "directionally_quasi_convex",
        ConvexityClass::None => "none",
    }
}

#[derive(Serialize)]
struct OmegaTable {
    beta: f64,
    m1: f64,
    frequencies: [f64; 3],
    /// Symmetric twist matrix in the signed action chart.
    omegas: [[f64; 3]; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    verified_omegas: Option<[[f64; 3]; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_relative_deviation: Option<f64>,
}

fn normalform_cmd(m: &Masses, verify: bool) -> Result<OmegaTable> {
    let mp = MassParameters::new(m)?;
    let fs = mp.frequencies()?;
    if let Some(hit) = resonances_up_to(&fs, 4, 1e-9 * fs.omega0).first() {
        return Err(lagrange::Error::Resonance {
            k0: hit.k[0],
            k1: hit.k[1],
            k2: hit.k[2],
            residual: hit.residual,
        });
    }
    let w = closed_form_omegas(&mp)?;
    let mut table = OmegaTable {
        beta: mp.beta,
        m1: mp.m1,
        frequencies: fs.signed(),
        omegas: w,
        verified_omegas: None,
        max_relative_deviation: None,
    };
    if verify {
        let nf = birkhoff_normal_form(&mp)?;
        let mut dev = 0.0f64;
        for j in 0..3 {
            for k in 0..3 {
                let scale = w[j][k].abs().max(1.0);
                dev = dev.max((nf.omegas[j][k] - w[j][k]).abs() / scale);
            }
        }
        table.verified_omegas = Some(nf.omegas);
        table.max_relative_deviation = Some(dev);
    }
    Ok(table)
}

#[derive(Serialize)]
struct SystemReport {
    system: &'static str,
    /// m2 / (m1 + m2); the third mass is regularized to 1e-12, so every
    /// figure below is a limit estimate, not an exact restricted-problem
    /// value.
    mass_ratio: f64,
    label: &'static str,
    beta: f64,
    nearest_resonant_beta: f64,
    resonance: ResonanceHit,
    convexity_class: ConvexityClass,
    steepness_radius: f64,
}

fn report_systems(max_order: Option<u32>) -> Result<Vec<SystemReport>> {
    let systems = [
        ("sun-jupiter", 9.538753e-4, 48),
        ("earth-moon", 0.0121506, 21),
    ];
    systems
        .iter()
        .map(|&(name, mu, default_order)| {
            let max_order = max_order.unwrap_or(default_order);
            let m = Masses::normalized(vec![1.0 - mu, mu, 1e-12])?;
            let mp = MassParameters::new(&m)?;
            let fs = mp.frequencies()?;
            let (beta_star, hit) = nearest_resonant_beta(mp.beta, max_order)?;
            let w = closed_form_omegas(&mp)?;
            Ok(SystemReport {
                system: name,
                mass_ratio: mu,
                label: "limit estimate",
                beta: mp.beta,
                nearest_resonant_beta: beta_star,
                resonance: hit,
                convexity_class: convexity_class(&w, &fs)?,
                steepness_radius: steepness_radius(&mp)?,
            })
        })
        .collect()
}

fn emit(output: Option<&str>, text: &str) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn run(cli: Cli) -> std::result::Result<u8, Box<dyn std::error::Error>> {
    if let Ok(workers) = std::env::var("LAGRANGE_WORKERS") {
        let n: usize = workers.parse()?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Classify {
            point,
            max_order,
            diophantine_c,
            diophantine_upsilon,
            diophantine_order,
        } => {
            let m = point.masses()?;
            let report = classify(
                &m,
                max_order,
                diophantine_c,
                diophantine_upsilon,
                diophantine_order,
            )?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.spectral.spectrally_stable { 0 } else { 2 })
        }
        Command::Sweep {
            resolution,
            mu_min,
            mu_max,
            output,
        } => {
            if !(0.0 <= mu_min && mu_min < mu_max && mu_max <= 1.0) || resolution == 0 {
                return Err("sweep range must satisfy 0 <= mu_min < mu_max <= 1".into());
            }
            let csv = sweep_csv(resolution, mu_min, mu_max);
            emit(output.as_deref(), &csv)?;
            Ok(0)
        }
        Command::Normalform { point, verify } => {
            let m = point.masses()?;
            let table = normalform_cmd(&m, verify)?;
            println!("{}", serde_json::to_string_pretty(&table)?);
            Ok(0)
        }
        Command::Integrate {
            point,
            z5,
            z6,
            zdot5,
            zdot6,
            r,
            upsilon,
            t_span,
            tol,
            output,
        } => {
            let m = point.masses()?;
            let cfg = equilateral_configuration(&m)?;
            let a = analyze_central_config(&cfg, &m)?;
            let sys = ReducedSystem::new(&a, &m);
            let s0 = ReducedState {
                z5,
                z6,
                zdot5,
                zdot6,
                r,
                upsilon,
                theta: 0.0,
            };
            let tr = integrate(&sys, &s0, t_span, tol)?;
            emit(output.as_deref(), &tr.to_csv(&sys)?)?;
            eprintln!(
                "steps: {}  energy drift: {:.3e}  momentum drift: {:.3e}",
                tr.times.len() - 1,
                tr.energy_drift,
                tr.momentum_drift
            );
            Ok(0)
        }
        Command::Resonances {
            point,
            max_order,
            tol,
        } => {
            let m = point.masses()?;
            let mp = MassParameters::new(&m)?;
            let fs = mp.frequencies()?;
            let hits = resonances_up_to(&fs, max_order, tol * fs.omega0);
            println!("{}", serde_json::to_string_pretty(&hits)?);
            Ok(0)
        }
        Command::ReportSystems { max_order } => {
            let reports = report_systems(max_order)?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // Parse errors must not collide with the "spectrally unstable" exit code.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
