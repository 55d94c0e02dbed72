//! Command-line driver: every library capability behind one subcommand,
//! with JSON/CSV artifacts suitable for scripted sweeps.
//!
//! Exit codes: 0 on success (check passed, reconstruction converged,
//! feasible), 1 on a negative verdict (check failed, non-convergence,
//! infeasible), 2 on usage or validation errors.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmarg::analytic::{depolarize_set, epsilon_star, mixed_reconstruct};
use qmarg::experiments::{
    ame_search, default_fraction_psd_tol, fraction_experiment, verify_identities, AmeOptions,
    FractionResult,
};
use qmarg::imposition::{
    check_self_consistency, closed_form, fixed_point_residual, impose_all, impose_all_ordered,
    ConsistencyReport, CONSISTENCY_TOL,
};
use qmarg::io::{
    load_marginals, load_state, render_fraction_table, save_operator, save_state,
    write_fraction_csv, write_trace_csv,
};
use qmarg::operator::hermitian_eigenvalues;
use qmarg::reconstruct::{run as run_reconstruction, ReconstructionConfig, SeedState, TraceRow};
use qmarg::sampling::RngStream;
use qmarg::{DensityMatrix64, Error, HermitianOperator64};

#[derive(Parser)]
#[command(name = "qmarg", version, about = "Quantum marginal imposition toolkit")]
struct Cli {
    /// Master seed for every stochastic subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    rng_seed: u64,

    /// Worker threads for sample-parallel subcommands; 0 uses all cores.
    /// Results do not depend on this value.
    #[arg(long, global = true, env = "QMARG_THREADS", default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a marginal set for mutual consistency on overlaps.
    Check {
        #[arg(long)]
        marginals: PathBuf,
        /// Bound on the squared Hilbert-Schmidt mismatch per overlap.
        #[arg(long, default_value_t = CONSISTENCY_TOL)]
        tol: f64,
    },
    /// Impose a marginal set on a state and write the resulting operator.
    Impose {
        #[arg(long)]
        marginals: PathBuf,
        /// Input state file; maximally mixed when omitted.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Evaluate the explicit inclusion-exclusion expression instead
        /// of sequential composition.
        #[arg(long, conflicts_with = "order")]
        closed_form: bool,
        /// Comma-separated permutation of marginal indices fixing the
        /// sequential composition order.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iteratively reconstruct a rank-constrained state from marginals.
    Reconstruct {
        #[arg(long)]
        marginals: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 1e-7)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 500)]
        stall_window: usize,
        /// `mm`, `random`, or a path to a state file.
        #[arg(long, default_value = "mm")]
        seed_state: String,
        /// Write the convergence trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Keep every Nth trace row (the final row is always kept).
        #[arg(long, default_value_t = 1)]
        trace_stride: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-shot feasibility: impose the marginals on the maximally mixed
    /// state and certify positivity, optionally after depolarization.
    Mixed {
        #[arg(long)]
        marginals: PathBuf,
        /// Depolarization strength applied to every marginal first.
        #[arg(long, conflicts_with = "auto_epsilon")]
        epsilon: Option<f64>,
        /// Depolarize at the threshold that guarantees feasibility.
        #[arg(long)]
        auto_epsilon: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo fraction of random generators whose k-body marginals
    /// impose a valid state on I/d.
    Fraction {
        /// Qubit counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Marginal body sizes, comma separated; cells with k >= n are skipped.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// Samples per cell; defaults scale down for n >= 9.
        #[arg(long)]
        samples: Option<usize>,
        /// Success threshold on the smallest eigenvalue; default 1e-10 * 2^n.
        #[arg(long)]
        psd_tol: Option<f64>,
        /// Required to run cells with n > 10.
        #[arg(long)]
        allow_large: bool,
        /// Render the cells as a text grid after the CSV.
        #[arg(long)]
        table: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a pure state whose k-body marginals are all maximally
    /// mixed, restarting from random seeds.
    Ame {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        local_dim: usize,
        /// Marginal body size; defaults to n/2 rounded down.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1e-7)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 500)]
        stall_window: usize,
        #[arg(long, default_value_t = 10)]
        attempts: usize,
        /// Write the last attempt's convergence trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        trace_stride: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare entrywise marginal constraint counts against the single
    /// fixed-point condition.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        local_dim: usize,
    },
    /// Check the explicit uniform-family imposition formulas against
    /// sequential composition on random generators.
    VerifyIdentities {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if cli.threads > 0 {
        pool = pool.num_threads(cli.threads);
    }
    if let Err(e) = pool.build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> qmarg::Result<u8> {
    let seed = cli.rng_seed;
    match cli.command {
        Command::Check { marginals, tol } => cmd_check(&marginals, tol),
        Command::Impose {
            marginals,
            state,
            closed_form,
            order,
            out,
        } => cmd_impose(&marginals, state.as_deref(), closed_form, order, out.as_deref()),
        Command::Reconstruct {
            marginals,
            rank,
            eps,
            max_iters,
            stall_window,
            seed_state,
            trace,
            trace_stride,
            out,
        } => cmd_reconstruct(ReconstructArgs {
            marginals,
            rank,
            eps,
            max_iters,
            stall_window,
            seed_state,
            trace,
            trace_stride,
            out,
            seed,
        }),
        Command::Mixed {
            marginals,
            epsilon,
            auto_epsilon,
            out,
        } => cmd_mixed(&marginals, epsilon, auto_epsilon, out.as_deref()),
        Command::Fraction {
            n,
            k,
            samples,
            psd_tol,
            allow_large,
            table,
            out,
        } => cmd_fraction(FractionArgs {
            n,
            k,
            samples,
            psd_tol,
            allow_large,
            table,
            out,
            seed,
        }),
        Command::Ame {
            n,
            local_dim,
            k,
            eps,
            max_iters,
            stall_window,
            attempts,
            trace,
            trace_stride,
            out,
        } => cmd_ame(AmeArgs {
            n,
            local_dim,
            k,
            eps,
            max_iters,
            stall_window,
            attempts,
            trace,
            trace_stride,
            out,
            seed,
        }),
        Command::Count { n, k, local_dim } => cmd_count(n, k, local_dim),
        Command::VerifyIdentities { max_n, tol } => cmd_verify(max_n, tol, seed),
    }
}

fn print_consistency(report: &ConsistencyReport<f64>) {
    println!("overlapping pairs: {}", report.per_pair.len());
    match report.worst_pair {
        Some((i, j)) => println!(
            "worst pair: ({i}, {j}) squared mismatch {:.3e}",
            report.worst_distance
        ),
        None => println!("worst pair: none (all party sets disjoint)"),
    }
    println!(
        "consistency: {} (tol {:.1e})",
        if report.pass { "PASS" } else { "FAIL" },
        report.tol
    );
}

fn cmd_check(path: &Path, tol: f64) -> qmarg::Result<u8> {
    let marginals = load_marginals(path)?;
    let report = check_self_consistency(&marginals, tol);
    print_consistency(&report);
    Ok(if report.pass { 0 } else { 1 })
}

fn summarize_operator(op: &HermitianOperator64) -> qmarg::Result<(f64, f64)> {
    let values = hermitian_eigenvalues(op)?;
    Ok((op.trace(), values[values.len() - 1]))
}

fn cmd_impose(
    marginals_path: &Path,
    state_path: Option<&Path>,
    use_closed_form: bool,
    order: Option<Vec<usize>>,
    out: Option<&Path>,
) -> qmarg::Result<u8> {
    let marginals = load_marginals(marginals_path)?;
    let input = match state_path {
        Some(path) => load_state(path)?,
        None => DensityMatrix64::maximally_mixed(marginals.shape().clone()),
    };
    let result = if use_closed_form {
        closed_form(input.as_operator(), &marginals)?
    } else if let Some(order) = order {
        impose_all_ordered(input.as_operator(), &marginals, &order)?
    } else {
        impose_all(input.as_operator(), &marginals)?
    };
    println!(
        "imposed {} marginals ({} route)",
        marginals.len(),
        if use_closed_form { "closed-form" } else { "sequential" }
    );
    let (trace, lambda_min) = summarize_operator(&result)?;
    println!("trace: {trace:.12}");
    println!("lambda_min: {lambda_min:.6e}");
    if let Some(path) = out {
        save_operator(path, &result)?;
        println!("output: {}", path.display());
    }
    Ok(0)
}

struct ReconstructArgs {
    marginals: PathBuf,
    rank: usize,
    eps: f64,
    max_iters: usize,
    stall_window: usize,
    seed_state: String,
    trace: Option<PathBuf>,
    trace_stride: usize,
    out: Option<PathBuf>,
    seed: u64,
}

fn parse_seed_state(text: &str) -> qmarg::Result<SeedState<f64>> {
    match text {
        "mm" | "maximally-mixed" => Ok(SeedState::MaximallyMixed),
        "random" | "hs" => Ok(SeedState::RandomHs),
        path => Ok(SeedState::Provided(load_state(Path::new(path))?)),
    }
}

fn write_trace_file(path: &Path, rows: &[TraceRow<f64>], stride: usize) -> qmarg::Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    write_trace_csv(&mut writer, rows, stride).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_reconstruct(args: ReconstructArgs) -> qmarg::Result<u8> {
    let marginals = load_marginals(&args.marginals)?;
    let config = ReconstructionConfig {
        marginals,
        rank: args.rank,
        eps: args.eps,
        max_iters: args.max_iters,
        stall_window: args.stall_window,
        seed_state: parse_seed_state(&args.seed_state)?,
        rng: RngStream::new(args.seed),
    };
    let report = run_reconstruction(&config)?;
    let last = report.trace.last().expect("at least one iteration ran");
    println!(
        "{} after {} iterations (D_T {:.3e})",
        if report.converged {
            "converged"
        } else if report.stall_detected {
            "stalled"
        } else {
            "iteration budget exhausted"
        },
        report.iterations,
        last.d_total
    );
    let residual = fixed_point_residual(&report.final_state, &config.marginals)?;
    println!("fixed-point residual: {residual:.3e}");
    if report.projection_fallback {
        eprintln!("warning: spectral projection fell back to a uniform top-r mixture");
    }
    if let Some(path) = &args.trace {
        write_trace_file(path, &report.trace, args.trace_stride)?;
        println!("trace: {}", path.display());
    }
    if let Some(path) = &args.out {
        save_state(path, &report.final_state)?;
        println!("output: {}", path.display());
    }
    Ok(if report.converged { 0 } else { 1 })
}

fn cmd_mixed(
    path: &Path,
    epsilon: Option<f64>,
    auto_epsilon: bool,
    out: Option<&Path>,
) -> qmarg::Result<u8> {
    let marginals = load_marginals(path)?;
    let threshold = epsilon_star(&marginals);
    println!("depolarization threshold: {threshold:.6}");
    let eps = if auto_epsilon {
        threshold
    } else {
        epsilon.unwrap_or(0.0)
    };
    println!("epsilon: {eps:.6}");
    let working = if eps > 0.0 {
        depolarize_set(&marginals, eps)?
    } else {
        marginals
    };
    let psd_tol = 1e-10 * working.shape().total_dim() as f64;
    let outcome = mixed_reconstruct(&working, psd_tol)?;
    if !outcome.consistency.pass {
        eprintln!(
            "warning: marginals are mutually inconsistent (worst squared mismatch {:.3e}); proceeding",
            outcome.consistency.worst_distance
        );
    }
    println!("lambda_min: {:.6e}", outcome.lambda_min);
    match outcome.state {
        Some(state) => {
            println!("feasible: yes");
            if let Some(out) = out {
                save_state(out, &state)?;
                println!("output: {}", out.display());
            }
            Ok(0)
        }
        None => {
            println!("feasible: no");
            Ok(1)
        }
    }
}

struct FractionArgs {
    n: Vec<usize>,
    k: Vec<usize>,
    samples: Option<usize>,
    psd_tol: Option<f64>,
    allow_large: bool,
    table: bool,
    out: Option<PathBuf>,
    seed: u64,
}

fn default_samples(n: usize) -> usize {
    match n {
        0..=8 => 1000,
        9 => 100,
        _ => 10,
    }
}

fn cmd_fraction(args: FractionArgs) -> qmarg::Result<u8> {
    let cells: Vec<(usize, usize)> = args
        .n
        .iter()
        .flat_map(|&n| args.k.iter().filter(move |&&k| k < n).map(move |&k| (n, k)))
        .collect();
    if cells.is_empty() {
        return Err(Error::BadArgument {
            context: "fraction",
            requirement: "at least one cell with k < n",
            got: format!("n={:?}, k={:?}", args.n, args.k),
        });
    }
    if let Some(&(n, _)) = cells.iter().find(|&&(n, _)| n > 10) {
        if !args.allow_large {
            return Err(Error::BadArgument {
                context: "fraction",
                requirement: "n <= 10 unless --allow-large is set",
                got: format!("n={n}"),
            });
        }
    }
    let mut results: Vec<FractionResult> = Vec::with_capacity(cells.len());
    for (index, (n, k)) in cells.iter().copied().enumerate() {
        let samples = args.samples.unwrap_or_else(|| {
            let s = default_samples(n);
            if n >= 9 {
                eprintln!("warning: defaulting to {s} samples at n={n}; pass --samples to override");
            }
            s
        });
        let psd_tol = args.psd_tol.unwrap_or_else(|| default_fraction_psd_tol(n));
        // One substream block per cell keeps cells independent of each
        // other's sample counts.
        let cell_stream = RngStream::with_stream(args.seed, (index as u64) << 32);
        let result = fraction_experiment::<f64>(n, k, samples, &cell_stream, psd_tol)?;
        results.push(result);
    }
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let mut writer = BufWriter::new(file);
            write_fraction_csv(&mut writer, &results).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_fraction_csv(&mut stdout, &results).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
        }
    }
    if args.table {
        print!("{}", render_fraction_table(&results));
    }
    Ok(0)
}

struct AmeArgs {
    n: usize,
    local_dim: usize,
    k: Option<usize>,
    eps: f64,
    max_iters: usize,
    stall_window: usize,
    attempts: usize,
    trace: Option<PathBuf>,
    trace_stride: usize,
    out: Option<PathBuf>,
    seed: u64,
}

fn cmd_ame(args: AmeArgs) -> qmarg::Result<u8> {
    let k = args.k.unwrap_or_else(|| (args.n / 2).max(1));
    let options = AmeOptions {
        eps: args.eps,
        max_iters: args.max_iters,
        stall_window: args.stall_window,
        attempts: args.attempts,
        rng: RngStream::new(args.seed),
    };
    let result = ame_search::<f64>(args.n, args.local_dim, k, &options)?;
    println!(
        "ame n={} local_dim={} k={}: {} (attempt {} of {})",
        args.n,
        args.local_dim,
        k,
        if result.report.converged {
            "converged"
        } else {
            "not converged"
        },
        result.attempts_used,
        args.attempts
    );
    let last = result.report.trace.last().expect("at least one iteration ran");
    println!("iterations: {} (D_T {:.3e})", result.report.iterations, last.d_total);
    println!("purity: {:.12}", result.purity);
    println!(
        "worst half-body squared mismatch: {:.3e}",
        result.worst_marginal_gap
    );
    println!("certified: {}", if result.certified { "yes" } else { "no" });
    if let Some(path) = &args.trace {
        write_trace_file(path, &result.report.trace, args.trace_stride)?;
        println!("trace: {}", path.display());
    }
    if let Some(path) = &args.out {
        save_state(path, &result.report.final_state)?;
        println!("output: {}", path.display());
    }
    Ok(if result.certified { 0 } else { 1 })
}

fn cmd_count(n: usize, k: usize, local_dim: usize) -> qmarg::Result<u8> {
    let counts = qmarg::analytic::constraint_counts(n, k, local_dim)?;
    println!("standard: {}", counts.standard);
    println!("compressed: {}", counts.compressed);
    println!("advantage: {}", counts.advantage);
    Ok(0)
}

fn cmd_verify(max_n: usize, tol: f64, seed: u64) -> qmarg::Result<u8> {
    let report = verify_identities::<f64>(max_n, &RngStream::new(seed))?;
    for check in &report.checks {
        match check.xi {
            Some(xi) => println!(
                "n={} k={} xi={} deviation {:.3e}",
                check.n, check.k, xi, check.deviation
            ),
            None => println!("n={} k={} deviation {:.3e}", check.n, check.k, check.deviation),
        }
    }
    println!("max deviation: {:.3e}", report.max_deviation);
    Ok(if report.max_deviation <= tol { 0 } else { 1 })
}
