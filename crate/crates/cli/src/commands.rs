use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dtnmap::asymptotics::{homogeneous_energy, sweep as sweep_rows};
use dtnmap::gen::{self, RandomSpec};
use dtnmap::geometry::{scale_report, ScaleReport};
use dtnmap::network::{NetworkDump, NetworkOptions};
use dtnmap::oracle::{solve_dirichlet, OracleConfig};
use dtnmap::{
    analyze_packing, Asymptotics64, EnergyBreakdown64, FourierPotential64, GeometryAnalysis64,
    Packing64,
};
use serde::Serialize;

use crate::args::{
    AnalyzeArgs, DtnArgs, Format, GenArgs, GenKind, NetworkArgs, Output, PotentialArgs, SweepArgs,
    ValidateArgs,
};
use crate::failure::Failure;

type Outcome = Result<(), Failure>;

fn emit(output: &Output, text: &str) -> Outcome {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Lossless fixed-layout float for CSV cells.
fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

fn load_packing(path: &Path) -> Result<Packing64, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    Ok(Packing64::from_json(&text)?)
}

fn potential(args: &PotentialArgs) -> Result<FourierPotential64, Failure> {
    let k_max = args.cos.iter().chain(&args.sin).map(|&(k, _)| k).max();
    let Some(k_max) = k_max else {
        return Err(Failure::usage("give at least one --cos K=A or --sin K=A"));
    };
    let mut cos = vec![0.0; k_max + 1];
    let mut sin = vec![0.0; k_max + 1];
    for &(k, a) in &args.cos {
        cos[k] = a;
    }
    for &(k, a) in &args.sin {
        sin[k] = a;
    }
    Ok(FourierPotential64::new(cos, sin)?)
}

fn options(args: &NetworkArgs) -> NetworkOptions<f64> {
    NetworkOptions {
        mode: args.mode.into(),
        delta_max_edge: args.delta_max_edge,
    }
}

fn model(packing: Packing64, options: &NetworkOptions<f64>) -> Result<Asymptotics64, Failure> {
    Ok(Asymptotics64::new(analyze_packing(packing)?, options)?)
}

pub fn gen(args: GenArgs) -> Outcome {
    let packing: Packing64 = match args.kind {
        GenKind::Ring {
            n,
            rho,
            radius,
            domain_radius,
        } => gen::ring(n, rho, radius, domain_radius)?,
        GenKind::EqualGapRing {
            n,
            ratio,
            domain_radius,
        } => gen::equal_gap_ring(n, domain_radius, ratio)?,
        GenKind::Grid {
            radius,
            delta,
            domain_radius,
        } => gen::hex_grid(domain_radius, radius, delta)?,
        GenKind::Random {
            n,
            r_min,
            r_max,
            delta_min,
            domain_radius,
            seed,
        } => gen::random(&RandomSpec {
            n,
            domain_radius,
            r_min,
            r_max,
            delta_min,
            seed,
        })?,
    };
    emit(&args.output, &format!("{}\n", packing.to_json()))
}

#[derive(Serialize)]
struct BoundaryValue {
    /// Position in the input packing.
    inclusion: usize,
    theta: f64,
    psi: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    mode: dtnmap::ConductivityMode,
    potential: FourierPotential64,
    breakdown: EnergyBreakdown64,
    excitation: Vec<BoundaryValue>,
    scale_report: Option<ScaleReport<f64>>,
}

fn boundary_values(a: &GeometryAnalysis64, values: &[f64]) -> Vec<BoundaryValue> {
    values
        .iter()
        .enumerate()
        .map(|(i, &psi)| BoundaryValue {
            inclusion: a.original_index[i],
            theta: a.boundary_angles[i],
            psi,
        })
        .collect()
}

pub fn analyze(args: AnalyzeArgs) -> Outcome {
    let psi = potential(&args.potential)?;
    let packing = load_packing(&args.network.packing)?;
    let opts = options(&args.network);
    let report = if packing.is_empty() {
        AnalyzeReport {
            mode: opts.mode,
            breakdown: homogeneous_energy(&psi),
            potential: psi,
            excitation: Vec::new(),
            scale_report: None,
        }
    } else {
        let m = model(packing, &opts)?;
        let excitation = boundary_values(m.analysis(), &m.boundary_excitation(&psi));
        AnalyzeReport {
            mode: opts.mode,
            breakdown: m.total_energy(&psi)?,
            potential: psi,
            excitation,
            scale_report: Some(scale_report(m.analysis())),
        }
    };
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let b = &report.breakdown;
            csv_text(
                &["E_net", "E_ref", "R_res", "total", "quad_form"],
                [[b.e_net, b.e_ref, b.r_res, b.total, b.quad_form]
                    .map(cell)
                    .to_vec()],
            )
        }
    };
    emit(&args.output, &text)
}

#[derive(Serialize)]
struct BoundaryNode {
    inclusion: usize,
    theta: f64,
}

#[derive(Serialize)]
struct DtnReport {
    boundary: Vec<BoundaryNode>,
    /// Row-major, indexed like `boundary`.
    matrix: Vec<Vec<f64>>,
    network: NetworkDump<f64>,
}

pub fn dtn(args: DtnArgs) -> Outcome {
    let m = model(
        load_packing(&args.network.packing)?,
        &options(&args.network),
    )?;
    let lambda = m.network().dtn_matrix()?;
    let matrix: Vec<Vec<f64>> = lambda
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    let text = match args.format {
        Format::Json => {
            let a = m.analysis();
            let boundary = (0..a.boundary_count)
                .map(|i| BoundaryNode {
                    inclusion: a.original_index[i],
                    theta: a.boundary_angles[i],
                })
                .collect();
            to_json(&DtnReport {
                boundary,
                matrix,
                network: m.network().dump(),
            })
        }
        Format::Csv => {
            let header: Vec<String> = (0..matrix.len()).map(|j| format!("b{j}")).collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_text(
                &header,
                matrix.iter().map(|r| r.iter().copied().map(cell).collect()),
            )
        }
    };
    emit(&args.output, &text)
}

pub fn sweep(args: SweepArgs) -> Outcome {
    if args.k_from > args.k_to {
        return Err(Failure::usage(format!(
            "empty k range {}..{}",
            args.k_from, args.k_to
        )));
    }
    let m = model(
        load_packing(&args.network.packing)?,
        &options(&args.network),
    )?;
    let ks: Vec<usize> = (args.k_from..=args.k_to).collect();
    let rows = sweep_rows(&m, &ks)?;
    let text = match args.format {
        Format::Json => to_json(&rows),
        Format::Csv => csv_text(
            &[
                "k",
                "epsilon",
                "eta",
                "regime",
                "E_net",
                "E_ref",
                "R_res",
                "total",
                "quad_form",
            ],
            rows.iter().map(|r| {
                let mut v = vec![
                    r.k.to_string(),
                    cell(r.epsilon),
                    cell(r.eta),
                    r.regime.to_string(),
                ];
                v.extend([r.e_net, r.e_ref, r.r_res, r.total, r.quad_form].map(cell));
                v
            }),
        ),
    };
    emit(&args.output, &text)
}

#[derive(Serialize)]
struct ErrorInfo {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ValidateRow {
    packing: PathBuf,
    inclusions: usize,
    /// Smallest gap over the smallest radius; absent without inclusions.
    delta_over_r: Option<f64>,
    asymptotic_quad_form: f64,
    oracle_quad_form: Option<f64>,
    relative_difference: Option<f64>,
    oracle_residual: Option<f64>,
    oracle_order: Option<OracleConfig>,
    oracle_refused: bool,
    oracle_error: Option<ErrorInfo>,
    #[serde(skip)]
    failure: Option<dtnmap::Error>,
}

#[derive(Serialize)]
struct TrendRow {
    delta_over_r: f64,
    relative_difference: f64,
}

#[derive(Serialize)]
struct ValidateReport {
    potential: FourierPotential64,
    rows: Vec<ValidateRow>,
    /// Rows with both forms, ordered by decreasing `delta_over_r`.
    trend: Vec<TrendRow>,
    trend_decreasing: Option<bool>,
}

fn validate_one(
    path: &Path,
    psi: &FourierPotential64,
    opts: &NetworkOptions<f64>,
    order: Option<usize>,
) -> Result<ValidateRow, Failure> {
    let packing = load_packing(path)?;
    let (asymptotic, delta_over_r) = if packing.is_empty() {
        (homogeneous_energy(psi).quad_form, None)
    } else {
        let a = analyze_packing(packing.clone())?;
        let gap = a.all_gap_widths().into_iter().fold(f64::INFINITY, f64::min);
        let r_min = a
            .packing
            .inclusions
            .iter()
            .map(|d| d.r)
            .fold(f64::INFINITY, f64::min);
        (
            Asymptotics64::new(a, opts)?.total_energy(psi)?.quad_form,
            Some(gap / r_min),
        )
    };
    let mut row = ValidateRow {
        packing: path.to_path_buf(),
        inclusions: packing.len(),
        delta_over_r,
        asymptotic_quad_form: asymptotic,
        oracle_quad_form: None,
        relative_difference: None,
        oracle_residual: None,
        oracle_order: None,
        oracle_refused: false,
        oracle_error: None,
        failure: None,
    };
    let k_max = psi.max_frequency();
    let config = match order {
        Some(m) => Ok(OracleConfig::uniform(m)),
        None => OracleConfig::auto(&packing, k_max),
    };
    let solved = config.and_then(|c| {
        row.oracle_order = Some(c);
        solve_dirichlet(&packing, psi, c)
    });
    match solved {
        Ok(sol) => {
            let q = 2.0 * sol.energy;
            row.oracle_quad_form = Some(q);
            row.relative_difference = Some((asymptotic - q).abs() / q.abs().max(f64::MIN_POSITIVE));
            row.oracle_residual = Some(sol.boundary_residual);
        }
        Err(e) => {
            row.oracle_refused = matches!(e, dtnmap::Error::OracleRefused(_));
            row.oracle_error = Some(ErrorInfo {
                kind: e.kind(),
                message: e.to_string(),
            });
            row.failure = (!row.oracle_refused).then_some(e);
        }
    }
    Ok(row)
}

pub fn validate(args: ValidateArgs) -> Outcome {
    let psi = potential(&args.potential)?;
    if let Some(m) = args.oracle_m {
        if m < psi.max_frequency() {
            return Err(Failure::usage(format!(
                "--oracle-m {m} is below the highest frequency {}",
                psi.max_frequency()
            )));
        }
    }
    let opts = NetworkOptions {
        mode: args.mode.into(),
        delta_max_edge: args.delta_max_edge,
    };
    let rows = args
        .packing
        .iter()
        .map(|p| validate_one(p, &psi, &opts, args.oracle_m))
        .collect::<Result<Vec<_>, _>>()?;

    let mut trend: Vec<TrendRow> = rows
        .iter()
        .filter_map(|r| {
            Some(TrendRow {
                delta_over_r: r.delta_over_r?,
                relative_difference: r.relative_difference?,
            })
        })
        .collect();
    trend.sort_by(|a, b| b.delta_over_r.total_cmp(&a.delta_over_r));
    let trend_decreasing = (trend.len() > 1).then(|| {
        trend
            .windows(2)
            .all(|w| w[1].relative_difference < w[0].relative_difference)
    });

    let failure = rows
        .iter()
        .find_map(|r| r.failure.clone())
        .map(Failure::from);
    let text = match args.format {
        Format::Json => to_json(&ValidateReport {
            potential: psi,
            rows,
            trend,
            trend_decreasing,
        }),
        Format::Csv => csv_text(
            &[
                "packing",
                "delta_over_r",
                "asymptotic_quad_form",
                "oracle_quad_form",
                "relative_difference",
                "oracle_residual",
                "oracle_refused",
            ],
            rows.iter().map(|r| {
                let opt = |x: Option<f64>| x.map(cell).unwrap_or_default();
                vec![
                    r.packing.display().to_string(),
                    opt(r.delta_over_r),
                    cell(r.asymptotic_quad_form),
                    opt(r.oracle_quad_form),
                    opt(r.relative_difference),
                    opt(r.oracle_residual),
                    r.oracle_refused.to_string(),
                ]
            }),
        ),
    };
    emit(&args.output, &text)?;
    failure.map_or(Ok(()), Err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn potential_needs_a_mode() {
        assert_eq!(potential(&PotentialArgs::default()).unwrap_err().code, 2);
        let p = potential(&PotentialArgs {
            cos: vec![(3, 1.0)],
            sin: vec![(1, -2.0)],
        })
        .unwrap();
        assert_eq!(p.cos_coeff(3), 1.0);
        assert_eq!(p.sin_coeff(1), -2.0);
        assert_eq!(p.max_frequency(), 3);
    }
}
