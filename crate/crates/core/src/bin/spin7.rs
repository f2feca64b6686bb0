use clap::{Parser, Subcommand, ValueEnum};
use spin7::euler::{chi_fermat_chain, chi_fermat_with, FiberRule};
use spin7::shell::{
    algebra_checks, enumerate_candidates, fixture_dir, load_scenario, betti_table, run, run_with, AlgebraCheck,
    Filter, Status, DEFAULT_DEGREE_CAP,
};
use spin7::wps::WeightSystem;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spin7", version, about = "Betti numbers of Spin(7) manifolds from Calabi-Yau 4-orbifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file through the pipeline.
    Analyze {
        file: PathBuf,
        /// Run only this parameter value.
        #[arg(long)]
        param: Option<i64>,
        /// Append a key=value dump.
        #[arg(long)]
        kv: bool,
    },
    /// Euler characteristic of a Fermat hypersurface.
    Chi {
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<i64>,
        #[arg(long, value_delimiter = ',', required = true)]
        exponents: Vec<i64>,
        /// Use the fibre count without the stratum correction.
        #[arg(long)]
        uncorrected: bool,
        /// Print the chain through the intermediate projections.
        #[arg(long)]
        chain: bool,
    },
    /// Reproduce the table of fourteen Betti triples.
    PaperTable {
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// List Fermat Calabi-Yau hypersurfaces passing the filters.
    Enumerate {
        #[arg(long)]
        max_d: i64,
        #[arg(long, value_enum)]
        filter: Vec<FilterArg>,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        cap: i64,
    },
    /// Exterior algebra and group checks.
    Algebra {
        #[arg(long, value_enum, default_value_t = CheckArg::All)]
        check: CheckArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Z4Scalar,
    Z2Neg,
    Smooth,
    Pairs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Forms,
    Groups,
    All,
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: Command) -> Result<bool, Box<dyn std::error::Error>> {
    match cmd {
        Command::Analyze { file, param, kv } => {
            let sc = load_scenario(&file)?;
            let reports = match param {
                Some(k) => vec![run_with(&sc, Some(k))?],
                None => run(&sc)?,
            };
            for r in &reports {
                print!("{}", r.render());
                if kv {
                    print!("{}", r.key_values());
                }
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
        Command::Chi { weights, exponents, uncorrected, chain } => {
            let w = WeightSystem::normalized(weights)?;
            if chain {
                let c = chi_fermat_chain(&w, &exponents)?;
                println!("{}", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
            } else {
                let rule = if uncorrected { FiberRule::Uncorrected } else { FiberRule::Corrected };
                println!("{}", chi_fermat_with(&w, &exponents, rule, true)?);
            }
            Ok(true)
        }
        Command::PaperTable { fixtures } => {
            let dir = fixtures.unwrap_or_else(fixture_dir);
            let rows = betti_table(&dir);
            for r in &rows {
                println!("{r}");
            }
            let ok = rows.iter().filter(|r| r.matches()).count();
            println!("{ok}/{} rows match", rows.len());
            Ok(ok == rows.len())
        }
        Command::Enumerate { max_d, filter, cap } => {
            let filters: Vec<Filter> = filter
                .into_iter()
                .map(|f| match f {
                    FilterArg::Z4Scalar => Filter::Z4ScalarOnly,
                    FilterArg::Z2Neg => Filter::Z2NegOnly,
                    FilterArg::Smooth => Filter::Smooth,
                    FilterArg::Pairs => Filter::PairStructure,
                })
                .collect();
            let found = enumerate_candidates(max_d, &filters, cap)?;
            for c in &found {
                println!("{c}");
            }
            println!("{} candidates", found.len());
            Ok(true)
        }
        Command::Algebra { check } => {
            let which = match check {
                CheckArg::Forms => AlgebraCheck::Forms,
                CheckArg::Groups => AlgebraCheck::Groups,
                CheckArg::All => AlgebraCheck::All,
            };
            let lines = algebra_checks(which);
            for l in &lines {
                println!("{:<6} {:<24} {}", l.status.to_string(), l.name, l.detail);
            }
            Ok(lines.iter().all(|l| l.status != Status::Fail))
        }
    }
}
