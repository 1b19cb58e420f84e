//! Command-line front end. Every subcommand prints one JSON document with a
//! `schema` tag and an echo of the resolved configuration, so runs can be
//! reproduced from their own output. Exact rationals serialize as "p/q"
//! strings; floats appear only in float-backend and Monte Carlo output.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use invlab::coeff::{format_rat, Rat};
use invlab::enumerate::{brute_local_distribution, brute_profile};
use invlab::family::DegreeWeightSequence;
use invlab::invpoly::{inversion_polynomials, pumped_factorial_moments, transfer_moments};
use invlab::limitlaws::{
    airy_moments, rayleigh_moment, ygamma_factorial_moment, ygamma_table,
};
use invlab::localdist::{
    local_distribution, local_distribution_ordered, local_distribution_unordered,
    local_factorial_moment, local_moment_asymptotic,
};
use invlab::sampler::{monte_carlo_global, monte_carlo_local, RngStream};
use invlab::verify::run_suite;
use invlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "invlab",
    version,
    about = "Inversion statistics for random labelled trees: exact series, limit laws, samplers"
)]
struct Cli {
    /// Worker threads for sampling (default: INVLAB_THREADS or all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the JSON document here instead of stdout
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Singularity constants tau, rho, c_phi, sigma of a family
    Constants {
        /// Built-in name (binary, ordered, unordered, cyclic) or JSON file
        #[arg(long)]
        family: String,
    },
    /// Exact inversion polynomial J_n(q) (or its root-1 restriction)
    Poly {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u64,
        /// Restrict to trees whose root carries label 1
        #[arg(long)]
        root1: bool,
    },
    /// Distribution of the inversions charged to label j at size n
    Local {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        j: u64,
        /// Use the per-family closed form (ordered and unordered only)
        #[arg(long)]
        closed_form: bool,
        #[arg(long, value_enum, default_value = "exact")]
        backend: Backend,
    },
    /// Factorial and raw moments, global (total inversions) or per-label
    Moments {
        #[arg(long)]
        family: String,
        #[arg(long, conflicts_with = "local", required_unless_present = "local")]
        global: bool,
        #[arg(long)]
        local: bool,
        #[arg(long)]
        n: u64,
        /// Label for --local
        #[arg(long, required_if_eq("local", "true"))]
        j: Option<u64>,
        /// Highest moment order
        #[arg(long, default_value = "3")]
        r: u64,
        #[arg(long, value_enum, default_value = "exact")]
        backend: Backend,
    },
    /// Evaluate the limit laws themselves
    Limitlaw {
        #[command(subcommand)]
        law: LimitLaw,
    },
    /// Monte Carlo sampling summary for the global or per-label statistic
    Sample {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        /// Base rng stream id (chunks use consecutive ids from here)
        #[arg(long, default_value = "0")]
        stream: u64,
        /// Per-label statistic instead of the total
        #[arg(long)]
        j: Option<u64>,
        /// Also write the raw histogram as "k,count" CSV
        #[arg(long)]
        emit_histogram: Option<std::path::PathBuf>,
    },
    /// Brute-force enumeration results (small n ground truth)
    Oracle {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u64,
        /// Dump the per-label pmf instead of the polynomials
        #[arg(long)]
        j: Option<u64>,
    },
    /// Run a named cross-check suite; nonzero exit on any failure
    Verify {
        /// oracle | closed-forms | mallows-riordan | moments | montecarlo
        #[arg(long)]
        suite: String,
        /// Size range override for the oracle and closed-forms suites
        #[arg(long)]
        max_n: Option<u64>,
        #[arg(long, default_value = "1234")]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum LimitLaw {
    /// Moments of the Airy distribution (exact constants and floats)
    Airy {
        #[arg(long)]
        r: u64,
    },
    /// The discrete law from the square-root window: pmf and moments
    Ygamma {
        #[arg(long)]
        gamma: f64,
        /// Largest pmf index to print
        #[arg(long)]
        k: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    let out = cli.output.clone();
    match dispatch(cli) {
        Ok((doc, ok)) => {
            let text = format!("{:#}\n", doc);
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                let mut stdout = std::io::stdout();
                let _ = stdout.write_all(text.as_bytes());
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn init_threads(cli_threads: Option<usize>) {
    let threads = cli_threads.or_else(|| {
        std::env::var("INVLAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        // a failure here means a pool already exists; that pool wins
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

/// Merge the command body into the schema/config envelope.
fn envelope(config: Value, body: Value) -> Value {
    let mut doc = json!({ "schema": "1", "config": config });
    if let (Some(d), Some(b)) = (doc.as_object_mut(), body.as_object()) {
        for (k, v) in b {
            d.insert(k.clone(), v.clone());
        }
    }
    doc
}

fn rat_map_json(coeffs: &std::collections::BTreeMap<u64, Rat>) -> Value {
    Value::Object(
        coeffs
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(format_rat(v))))
            .collect(),
    )
}

fn dispatch(cli: Cli) -> Result<(Value, bool)> {
    match cli.command {
        Command::Constants { family } => {
            let fam = DegreeWeightSequence::resolve(&family)?;
            let c = fam.solve_constants()?;
            let config = json!({ "command": "constants", "family": family, "resolved": fam.name() });
            let body = json!({
                "tau": c.tau, "rho": c.rho, "c_phi": c.c_phi, "sigma": c.sigma,
                "support_period": c.d, "residual": c.residual,
            });
            Ok((envelope(config, body), true))
        }

        Command::Poly { family, n, root1 } => {
            let fam = DegreeWeightSequence::resolve(&family)?;
            let pairs = inversion_polynomials(&fam, n)?;
            let pair = &pairs[n as usize - 1];
            let poly = if root1 { &pair.root1 } else { &pair.all };
            let config = json!({
                "command": "poly", "family": family, "resolved": fam.name(),
                "n": n, "root1": root1,
            });
            let body = json!({
                "n": n,
                "coeffs": rat_map_json(&poly.coeffs),
                "total": format_rat(&poly.total()),
            });
            Ok((envelope(config, body), true))
        }

        Command::Local {
            family,
            n,
            j,
            closed_form,
            backend,
        } => {
            let fam = DegreeWeightSequence::resolve(&family)?;
            let config = json!({
                "command": "local", "family": family, "resolved": fam.name(),
                "n": n, "j": j, "closed_form": closed_form,
                "backend": if backend == Backend::Float { "float" } else { "exact" },
            });
            let body = if closed_form {
                if backend == Backend::Float {
                    return Err(Error::InvalidParameter(
                        "closed forms are exact; drop --backend float".into(),
                    ));
                }
                let closed = match fam.name() {
                    "ordered" => local_distribution_ordered as fn(u64, u64, u64) -> Result<Rat>,
                    "unordered" => local_distribution_unordered,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "no closed form for family `{other}` (ordered and unordered only)"
                        )))
                    }
                };
                let probs: Result<Vec<Rat>> = (0..=n - j).map(|k| closed(n, j, k)).collect();
                json!({
                    "family": fam.name(), "n": n, "j": j,
                    "probs": probs?.iter().map(format_rat).collect::<Vec<_>>(),
                })
            } else if backend == Backend::Float {
                local_distribution::<f64>(&fam, n, j)?.to_json()
            } else {
                local_distribution::<Rat>(&fam, n, j)?.to_json()
            };
            Ok((envelope(config, body), true))
        }

        Command::Moments {
            family,
            global: _,
            local,
            n,
            j,
            r,
            backend,
        } => {
            let fam = DegreeWeightSequence::resolve(&family)?;
            let is_float = backend == Backend::Float;
            let config = json!({
                "command": "moments", "family": family, "resolved": fam.name(),
                "mode": if local { "local" } else { "global" },
                "n": n, "j": j, "r": r,
                "backend": if is_float { "float" } else { "exact" },
            });
            let body = if local {
                let j = j.ok_or_else(|| Error::InvalidParameter("--local needs --j".into()))?;
                let asymptotic: Option<Vec<f64>> = fam.solve_constants().ok().map(|c| {
                    (0..=r).map(|rr| local_moment_asymptotic(&c, n, j, rr)).collect()
                });
                if is_float {
                    let fact: Result<Vec<f64>> =
                        (0..=r).map(|rr| local_factorial_moment::<f64>(&fam, n, j, rr)).collect();
                    json!({ "n": n, "j": j, "factorial": fact?, "asymptotic": asymptotic })
                } else {
                    let fact: Result<Vec<Rat>> =
                        (0..=r).map(|rr| local_factorial_moment::<Rat>(&fam, n, j, rr)).collect();
                    json!({
                        "n": n, "j": j,
                        "factorial": fact?.iter().map(format_rat).collect::<Vec<_>>(),
                        "asymptotic": asymptotic,
                    })
                }
            } else {
                if !is_float && n > 64 {
                    return Err(Error::Budget(format!(
                        "exact global moments capped at n = 64 (requested {n}); \
                         pass --backend float"
                    )));
                }
                if is_float {
                    let tables = pumped_factorial_moments::<f64>(&fam, n, r)?;
                    let hat = tables
                        .iter()
                        .find(|t| t.n == n)
                        .ok_or_else(|| Error::InvalidParameter(format!("no trees of size {n}")))?;
                    let full = transfer_moments(hat, n);
                    json!({ "n": n, "root1": hat.to_json(), "all": full.to_json() })
                } else {
                    let tables = pumped_factorial_moments::<Rat>(&fam, n, r)?;
                    let hat = tables
                        .iter()
                        .find(|t| t.n == n)
                        .ok_or_else(|| Error::InvalidParameter(format!("no trees of size {n}")))?;
                    let full = transfer_moments(hat, n);
                    json!({ "n": n, "root1": hat.to_json(), "all": full.to_json() })
                }
            };
            Ok((envelope(config, body), true))
        }

        Command::Limitlaw { law } => match law {
            LimitLaw::Airy { r } => {
                if r == 0 || r > 64 {
                    return Err(Error::InvalidParameter("need 1 <= r <= 64".into()));
                }
                let a = airy_moments(r);
                let config = json!({ "command": "limitlaw", "law": "airy", "r": r });
                let body = json!({
                    "c": a.c[1..].iter().map(format_rat).collect::<Vec<_>>(),
                    "mu": a.mu[1..].to_vec(),
                });
                Ok((envelope(config, body), true))
            }
            LimitLaw::Ygamma { gamma, k } => {
                if !(gamma > 0.0) || gamma > 1e3 {
                    return Err(Error::InvalidParameter("need 0 < gamma <= 1000".into()));
                }
                let pmf = ygamma_table(gamma, k);
                let mass: f64 = ygamma_table(gamma, invlab::limitlaws::ygamma_support_hint(gamma))
                    .iter()
                    .sum();
                let config = json!({ "command": "limitlaw", "law": "ygamma", "gamma": gamma, "k": k });
                let body = json!({
                    "pmf": pmf,
                    "total_mass": mass,
                    "factorial_moments": (0..=4u64)
                        .map(|r| ygamma_factorial_moment(gamma, r))
                        .collect::<Vec<_>>(),
                    "rayleigh_scale_mean": gamma * rayleigh_moment(1.0, 1),
                });
                Ok((envelope(config, body), true))
            }
        },

        Command::Sample {
            family,
            n,
            reps,
            seed,
            stream,
            j,
            emit_histogram,
        } => {
            let fam = DegreeWeightSequence::resolve(&family)?;
            let base = RngStream::new(seed, stream);
            let summary = match j {
                Some(j) => monte_carlo_local(&fam, n, j, reps, base)?,
                None => monte_carlo_global(&fam, n, reps, base)?,
            };
            if let Some(path) = emit_histogram {
                std::fs::write(&path, summary.histogram_csv())?;
            }
            let config = json!({
                "command": "sample", "family": family, "resolved": fam.name(),
                "n": n, "j": j, "reps": reps, "seed": seed, "stream": stream,
            });
            Ok((envelope(config, summary.to_json()), true))
        }

        Command::Oracle { family, n, j } => {
            let fam = DegreeWeightSequence::resolve(&family)?;
            let config = json!({
                "command": "oracle", "family": family, "resolved": fam.name(),
                "n": n, "j": j,
            });
            let body = match j {
                Some(j) => brute_local_distribution(&fam, n, j)?.to_json(),
                None => {
                    let profile = brute_profile(&fam, n)?;
                    json!({
                        "n": n,
                        "all": rat_map_json(&profile.all.coeffs),
                        "root1": rat_map_json(&profile.root1.coeffs),
                        "total": format_rat(&profile.total),
                    })
                }
            };
            Ok((envelope(config, body), true))
        }

        Command::Verify { suite, max_n, seed } => {
            let report = run_suite(&suite, max_n, seed)?;
            let config = json!({
                "command": "verify", "suite": suite, "max_n": max_n, "seed": seed,
            });
            let ok = report.passed();
            Ok((envelope(config, report.to_json()), ok))
        }
    }
}
