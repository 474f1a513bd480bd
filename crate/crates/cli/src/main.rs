mod svg;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use trispec_core::basis::BasisKind;
use trispec_core::mapping::{mapped_lgl_grid, GridKind, TriangleMap};
use trispec_core::singular::build_table;
use trispec_core::solver::{
    assemble_system, convergence_study, default_m_quad, error_norms, relative_residual, solve,
    Problem,
};

#[derive(Parser, Debug)]
#[command(name = "trispec", version, about = "Spectral elements on triangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump the singular integral table.
    Table {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the mapped LGL grid on the reference triangle.
    Grids {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        kind: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a scatter plot next to --out.
        #[arg(long, requires = "out")]
        svg: bool,
    },
    /// Solve one problem and report its errors.
    Solve {
        #[arg(long, value_enum)]
        problem: ProblemName,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Basis::Modal)]
        basis: Basis,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write mass, stiffness, rhs, mask and coefficients as CSV files.
        #[arg(long)]
        dump_matrices: Option<PathBuf>,
        /// Report zero timings.
        #[arg(long)]
        no_timings: bool,
    },
    /// Errors over a list of orders.
    Convergence {
        #[arg(long, value_enum)]
        problem: ProblemName,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Basis::Modal)]
        basis: Basis,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a log-log plot next to --out.
        #[arg(long, requires = "out")]
        svg: bool,
        #[arg(long)]
        no_timings: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Grid {
    Newmap,
    Duffy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Basis {
    Modal,
    Nodal,
}

impl From<Basis> for BasisKind {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Modal => BasisKind::Modal,
            Basis::Nodal => BasisKind::Nodal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProblemName {
    Example1,
    Example2,
    ManufacturedXy,
}

impl ProblemName {
    fn problem(self) -> Problem {
        match self {
            ProblemName::Example1 => Problem::example1(),
            ProblemName::Example2 => Problem::example2(),
            ProblemName::ManufacturedXy => {
                Problem::manufactured_xy(1.0).expect("gamma = 1 is valid")
            }
        }
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<trispec_core::Error> for Failure {
    fn from(e: trispec_core::Error) -> Self {
        match e {
            trispec_core::Error::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("i/o: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: Option<&Path>, data: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, data)?,
        None => std::io::stdout().write_all(data.as_bytes())?,
    }
    Ok(())
}

fn svg_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

fn check_order(n: usize) -> Outcome {
    if n == 0 {
        Err(Failure::Usage("--n must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn run_table(n: usize, format: Format, out: Option<&Path>) -> Outcome {
    check_order(n)?;
    let table = build_table(n)?;
    let data = match format {
        Format::Json => {
            let v = serde_json::json!({ "n_max": table.n_max, "values": table.rows() });
            serde_json::to_string(&v).expect("table serializes") + "\n"
        }
        Format::Csv => {
            let mut s = String::from("p,q,value\n");
            for p in 0..table.dim() {
                for q in 0..table.dim() {
                    if let Some(v) = table.get(p, q) {
                        let _ = writeln!(s, "{p},{q},{v:.16e}");
                    }
                }
            }
            s
        }
    };
    emit(out, &data)
}

fn run_grids(n: usize, kind: Grid, out: Option<&Path>, svg: bool) -> Outcome {
    check_order(n)?;
    let (gk, title) = match kind {
        Grid::Newmap => (GridKind::NewMap, "rectangle-triangle map"),
        Grid::Duffy => (GridKind::Duffy, "Duffy map"),
    };
    let pts = mapped_lgl_grid(n, gk, &TriangleMap::reference())?;
    let mut s = String::from("x,y\n");
    for (x, y) in &pts {
        let _ = writeln!(s, "{x:.16e},{y:.16e}");
    }
    emit(out, &s)?;
    if let (true, Some(p)) = (svg, out) {
        fs::write(
            svg_path(p),
            svg::scatter(&pts, &format!("{title}, N = {n}")),
        )?;
    }
    Ok(())
}

fn write_matrix_csv(
    path: &Path,
    rows: usize,
    cols: usize,
    at: impl Fn(usize, usize) -> f64,
) -> Outcome {
    let mut s = String::new();
    for i in 0..rows {
        let line: Vec<String> = (0..cols).map(|j| format!("{:.16e}", at(i, j))).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

fn run_solve(
    name: ProblemName,
    n: usize,
    basis: Basis,
    format: Format,
    dump: Option<&Path>,
    no_timings: bool,
) -> Outcome {
    check_order(n)?;
    let problem = name.problem();
    let table = build_table(2 * n)?;
    let t0 = Instant::now();
    let system = assemble_system(&problem, n, basis.into(), &table)?;
    let t1 = Instant::now();
    let sol = solve(&system)?;
    let t2 = Instant::now();
    let residual = relative_residual(&system, &sol);
    let exact = problem
        .exact
        .clone()
        .expect("built-in problems have exact solutions");
    let (l2, linf) = error_norms(&sol, |x, y| exact(x, y), default_m_quad(n))?;
    let (ta, ts) = if no_timings {
        (0.0, 0.0)
    } else {
        ((t1 - t0).as_secs_f64(), (t2 - t1).as_secs_f64())
    };

    if let Some(dir) = dump {
        fs::create_dir_all(dir)?;
        let m = system.mass.nrows();
        write_matrix_csv(&dir.join("mass.csv"), m, m, |i, j| system.mass[(i, j)])?;
        write_matrix_csv(&dir.join("stiffness.csv"), m, m, |i, j| {
            system.stiffness[(i, j)]
        })?;
        let rhs = system.rhs();
        write_matrix_csv(&dir.join("rhs.csv"), m, 1, |i, _| rhs[i])?;
        write_matrix_csv(&dir.join("coeffs.csv"), m, 1, |i, _| sol.coeffs[i])?;
        let mask: String = system
            .dirichlet_mask
            .iter()
            .map(|&b| if b { "1\n" } else { "0\n" })
            .collect();
        fs::write(dir.join("mask.csv"), mask)?;
    }

    let kind: BasisKind = basis.into();
    let data = match format {
        Format::Json => {
            let v = serde_json::json!({
                "problem": problem.name,
                "basis": kind,
                "N": n,
                "l2": l2,
                "linf": linf,
                "residual": residual,
                "assemble_s": ta,
                "solve_s": ts,
            });
            serde_json::to_string_pretty(&v).expect("summary serializes") + "\n"
        }
        Format::Csv => format!(
            "problem,basis,N,l2,linf,residual,assemble_s,solve_s\n{},{kind},{n},{l2:.16e},{linf:.16e},{residual:.16e},{ta:.16e},{ts:.16e}\n",
            problem.name
        ),
    };
    emit(None, &data)
}

fn run_convergence(
    name: ProblemName,
    n_list: &[usize],
    basis: Basis,
    format: Format,
    out: Option<&Path>,
    svg: bool,
    no_timings: bool,
) -> Outcome {
    if n_list.is_empty() || n_list.contains(&0) || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Usage(
            "--n-list must be a nonempty strictly ascending list of orders >= 1".into(),
        ));
    }
    let problem = name.problem();
    let table = build_table(2 * n_list[n_list.len() - 1])?;
    let mut report = convergence_study(&problem, n_list, basis.into(), &table)?;
    if no_timings {
        report = report.without_timings();
    }
    let data = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    emit(out, &data)?;
    if let (true, Some(p)) = (svg, out) {
        let series = |f: fn(&trispec_core::solver::ConvergenceRow) -> f64| {
            report
                .rows
                .iter()
                .map(|r| (r.n as f64, f(r)))
                .collect::<Vec<_>>()
        };
        let plot = svg::loglog(
            &[("L2", series(|r| r.l2)), ("Linf", series(|r| r.linf))],
            "N",
            &format!("{} ({})", report.problem, report.basis),
        );
        fs::write(svg_path(p), plot)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Table { n, format, out } => run_table(n, format, out.as_deref()),
        Command::Grids { n, kind, out, svg } => run_grids(n, kind, out.as_deref(), svg),
        Command::Solve {
            problem,
            n,
            basis,
            format,
            dump_matrices,
            no_timings,
        } => run_solve(
            problem,
            n,
            basis,
            format,
            dump_matrices.as_deref(),
            no_timings,
        ),
        Command::Convergence {
            problem,
            n_list,
            basis,
            format,
            out,
            svg,
            no_timings,
        } => run_convergence(
            problem,
            &n_list,
            basis,
            format,
            out.as_deref(),
            svg,
            no_timings,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("trispec: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("trispec: {m}");
            ExitCode::from(1)
        }
    }
}
