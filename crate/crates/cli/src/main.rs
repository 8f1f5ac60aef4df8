use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bounds_cli::{
    cmd_const, cmd_crossover, cmd_dominance, cmd_extremum, cmd_lemmas, cmd_limit, cmd_list, cmd_maxerr, cmd_region,
    cmd_show, cmd_substitution, cmd_table, cmd_verify, CliError, Filter, Format, RunConfig, Session, Verdict,
    DEFAULT_DIGITS,
};
use bounds_core::analysis::Extremum;
use bounds_core::catalog::{Endpoint, RegionKind, Side};
use bounds_core::verifier::{Transform, DEFAULT_GRID, DEFAULT_REFINE};
use clap::{Parser, Subcommand, ValueEnum};

/// Numeric verifier for a catalog of elementary-function inequalities.
#[derive(Parser)]
#[command(name = "bounds", version)]
struct Cli {
    /// Grid points per interval (at least 64).
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Refinement depth around local minima.
    #[arg(long, global = true, default_value_t = DEFAULT_REFINE)]
    refine: usize,
    /// Decimal digits of the reference evaluation (30 to 64).
    #[arg(long, global = true, default_value_t = DEFAULT_DIGITS)]
    digits: u32,
    /// Right end used for unbounded domains [default: 10, or 1000 for maxerr].
    #[arg(long, global = true)]
    xmax: Option<f64>,
    /// Worker threads [default: logical CPUs].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Emit CSV instead of text.
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Catalog file to use instead of the built-in one.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Lower,
    Upper,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sup,
    Inf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EndArg {
    Lo,
    Hi,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    UnitSquare,
    Strip,
    Diagonal,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Cos2t,
    Tant,
    Identity,
}

#[derive(Subcommand)]
enum Cmd {
    /// List catalog entries.
    List {
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        tag: Vec<String>,
        #[arg(long, value_enum)]
        side: Option<SideArg>,
    },
    /// Show one entry.
    Show { id: String },
    /// Verify entries against their expected status.
    Verify {
        ids: Vec<String>,
        #[arg(long, conflicts_with = "ids")]
        all: bool,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        tag: Vec<String>,
    },
    /// Crossover abscissae of two same-side bounds.
    Crossover {
        a: String,
        b: String,
        /// Restrict to an interval such as "(0,pi/2)".
        #[arg(long)]
        interval: Option<String>,
    },
    /// Maximum relative error of a bound.
    Maxerr {
        id: String,
        #[arg(long)]
        interval: Option<String>,
    },
    /// Closed form, value and printed decimal of catalog constants.
    Const { name: Option<String> },
    /// CSV of bounds and target at uniform interior points.
    Table {
        target: String,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, value_delimiter = ',')]
        ids: Vec<String>,
    },
    /// Monotonicity and endpoint-limit claims.
    Lemmas { ids: Vec<String> },
    /// Pairwise dominance among bounds of one target.
    Dominance {
        target: String,
        #[arg(long, value_enum)]
        side: Option<SideArg>,
        #[arg(long, value_delimiter = ',')]
        ids: Vec<String>,
    },
    /// Agreement of two bounds under a change of variable.
    Substitution {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value = "cos2t")]
        transform: TransformArg,
    },
    /// Numeric sup or inf of an expression in x.
    Extremum {
        expr: String,
        #[arg(long)]
        interval: String,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Endpoint limit of an expression in x.
    Limit {
        expr: String,
        #[arg(long)]
        interval: String,
        #[arg(long, value_enum)]
        end: EndArg,
        #[arg(long)]
        expect: String,
    },
    /// Sup or inf of an expression in x and y over a region.
    Region {
        expr: String,
        #[arg(long, value_enum)]
        region: RegionArg,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
}

fn side(s: Option<SideArg>) -> Option<Side> {
    s.map(|s| match s {
        SideArg::Lower => Side::Lower,
        SideArg::Upper => Side::Upper,
    })
}

fn kind(k: KindArg) -> Extremum {
    match k {
        KindArg::Sup => Extremum::Sup,
        KindArg::Inf => Extremum::Inf,
    }
}

fn run(cli: Cli) -> Result<Verdict, CliError> {
    let mut cfg = RunConfig {
        grid_n: cli.grid,
        refine_depth: cli.refine,
        digits: cli.digits,
        x_max: cli.xmax,
        format: if cli.json {
            Format::Json
        } else if cli.csv {
            Format::Csv
        } else {
            Format::Text
        },
        catalog: cli.catalog.clone(),
        jobs: cli.jobs,
        filter: Filter::default(),
    };
    // Validate numeric flags up front so every command rejects them alike.
    cfg.settings(1.0)?;
    let session = Session::load(cfg.catalog.as_deref())?;
    let ok = |output: String| Verdict { output, code: 0 };
    match cli.cmd {
        Cmd::List { target, tag, side: s } => {
            cfg.filter = Filter { ids: Vec::new(), tags: tag, target, side: side(s) };
            Ok(ok(cmd_list(&cfg, &session.catalog)))
        }
        Cmd::Show { id } => cmd_show(&session.catalog, &id).map(ok),
        Cmd::Verify { ids, all, target, tag } => {
            cfg.filter = Filter { ids: Vec::new(), tags: tag, target, side: None };
            let all = all || (ids.is_empty() && (cfg.filter.target.is_some() || !cfg.filter.tags.is_empty()));
            cmd_verify(&cfg, &session, &ids, all)
        }
        Cmd::Crossover { a, b, interval } => cmd_crossover(&cfg, &session, &a, &b, interval.as_deref()).map(ok),
        Cmd::Maxerr { id, interval } => cmd_maxerr(&cfg, &session, &id, interval.as_deref()).map(ok),
        Cmd::Const { name } => cmd_const(&cfg, &session, name.as_deref()).map(ok),
        Cmd::Table { target, points, ids } => {
            cfg.format = Format::Csv;
            cmd_table(&cfg, &session, &target, &ids, points).map(ok)
        }
        Cmd::Lemmas { ids } => cmd_lemmas(&cfg, &session, &ids),
        Cmd::Dominance { target, side: s, ids } => {
            cfg.filter.side = side(s);
            cmd_dominance(&cfg, &session, &target, &ids).map(ok)
        }
        Cmd::Substitution { a, b, transform } => {
            let t = match transform {
                TransformArg::Cos2t => Transform::CosTwoT,
                TransformArg::Tant => Transform::TanT,
                TransformArg::Identity => Transform::Identity,
            };
            cmd_substitution(&cfg, &session, &a, &b, t)
        }
        Cmd::Extremum { expr, interval, kind: k } => cmd_extremum(&cfg, &session, &expr, &interval, kind(k)).map(ok),
        Cmd::Limit { expr, interval, end, expect } => {
            let end = match end {
                EndArg::Lo => Endpoint::Lo,
                EndArg::Hi => Endpoint::Hi,
            };
            cmd_limit(&cfg, &session, &expr, &interval, end, &expect)
        }
        Cmd::Region { expr, region, kind: k } => {
            let r = match region {
                RegionArg::UnitSquare => RegionKind::UnitSquare,
                RegionArg::Strip => RegionKind::Strip,
                RegionArg::Diagonal => RegionKind::Diagonal,
            };
            cmd_region(&cfg, &session, &expr, r, kind(k)).map(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(v) => {
            let written = match &out {
                Some(p) => std::fs::write(p, v.output.as_bytes()),
                None => std::io::stdout().lock().write_all(v.output.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("bounds: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(v.code as u8)
        }
        Err(e) => {
            eprintln!("bounds: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
