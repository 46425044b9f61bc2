//! Command-line front end: pmf tables, exact polynomials, cross-method
//! verification, the term-census report, and a timing benchmark.
//!
//! Exit codes are a stable contract for CI use: 0 success, 1 engine error,
//! 2 config error, 3 verification mismatch.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use poisson_order_k::{
    enumerate_compositions, pmf_polynomial, pmf_table, term_census,
    BlockIndex, EngineError, EvaluateError, LambdaPolynomial, MethodKind, OrderKParams, Rational,
};

const EXIT_ENGINE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "poisson-order-k", version, about = "Exact pmf of the Poisson distribution of order k")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a pmf table for n = 0..=n_max.
    Table(TableArgs),
    /// Print the exact polynomial factor of one pmf value.
    Exact(ExactArgs),
    /// Check that the engines produce identical exact polynomials, plus the
    /// structural facts, over a grid.
    Verify(VerifyArgs),
    /// Count generated monomial contributions per engine over a grid.
    Census(CensusArgs),
    /// Time polynomial construction per engine over a grid; CSV output.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Oracle,
    Km,
    Alt,
    K2,
}

impl From<MethodArg> for MethodKind {
    fn from(m: MethodArg) -> MethodKind {
        match m {
            MethodArg::Oracle => MethodKind::Oracle,
            MethodArg::Km => MethodKind::Km,
            MethodArg::Alt => MethodKind::Alt,
            MethodArg::K2 => MethodKind::K2,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 2)]
    k: u64,
    /// Rate λ as a plain decimal string, e.g. 0.5.
    #[arg(long)]
    lambda: String,
    #[arg(long = "n-max")]
    n_max: u64,
    #[arg(long, value_enum, default_value = "alt")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, default_value_t = 2)]
    k: u64,
    #[arg(long)]
    n: u64,
    #[arg(long, value_enum, default_value = "alt")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Print "L" instead of the Unicode λ in text output.
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Single order to check; omit for the default grid k = 1..=6.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long = "n-max", default_value_t = 60)]
    n_max: u64,
    /// Comma-separated engines to compare.
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [MethodArg::Oracle, MethodArg::Km, MethodArg::Alt])]
    methods: Vec<MethodArg>,
}

#[derive(Args)]
struct CensusArgs {
    /// Single order to report; omit for the default grid k = 1..=6.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long = "n-max", default_value_t = 60)]
    n_max: u64,
    /// Subset of km,alt.
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [MethodArg::Km, MethodArg::Alt])]
    methods: Vec<MethodArg>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    k: u64,
    #[arg(long = "n-max", default_value_t = 200)]
    n_max: u64,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [MethodArg::Km, MethodArg::Alt])]
    methods: Vec<MethodArg>,
    /// Timing rounds per (method, n); the median is reported.
    #[arg(long, default_value_t = 9)]
    rounds: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Table(args) => cmd_table(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Census(args) => cmd_census(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> CliError {
        CliError {
            code: EXIT_ENGINE,
            message: e.to_string(),
        }
    }
}

impl From<EvaluateError> for CliError {
    fn from(e: EvaluateError) -> CliError {
        CliError {
            code: EXIT_ENGINE,
            message: e.to_string(),
        }
    }
}

fn parse_lambda(s: &str) -> Result<f64, CliError> {
    let exact = Rational::from_decimal_str(s)
        .map_err(|_| config_error(format!("lambda must be a plain decimal string, got {s:?}")))?;
    let lambda = exact.to_f64();
    if !(lambda > 0.0) {
        return Err(config_error(format!("lambda must be positive, got {s}")));
    }
    Ok(lambda)
}

fn check_method_k(method: MethodKind, k: u64) -> Result<(), CliError> {
    if method == MethodKind::K2 && k != 2 {
        return Err(config_error(format!("method k2 requires --k 2, got k = {k}")));
    }
    Ok(())
}

fn cmd_table(args: TableArgs) -> Result<ExitCode, CliError> {
    if args.k < 1 {
        return Err(config_error("--k must be at least 1"));
    }
    let method = MethodKind::from(args.method);
    check_method_k(method, args.k)?;
    let lambda = parse_lambda(&args.lambda)?;
    let params = OrderKParams::new(args.k, lambda).map_err(|e| config_error(e.to_string()))?;
    let table = pmf_table(&params, args.n_max, method)?;

    match args.format {
        Format::Csv => {
            println!("n,probability,log_probability,cumulative");
            let mut cumulative = 0.0;
            for e in &table.entries {
                cumulative += e.probability;
                println!("{},{:.17e},{:.17e},{:.17e}", e.n, e.probability, e.log_probability, cumulative);
            }
        }
        Format::Json => {
            let entries: Vec<serde_json::Value> = {
                let mut cumulative = 0.0;
                table
                    .entries
                    .iter()
                    .map(|e| {
                        cumulative += e.probability;
                        serde_json::json!({
                            "n": e.n,
                            "probability": e.probability,
                            "log_probability": e.log_probability,
                            "cumulative": cumulative,
                        })
                    })
                    .collect()
            };
            let doc = serde_json::json!({
                "k": args.k,
                "lambda": lambda,
                "method": method.as_str(),
                "n_max": args.n_max,
                "entries": entries,
                "cumulative": table.cumulative,
            });
            println!("{doc}");
        }
        Format::Text => {
            println!("pmf table  k={} lambda={} method={}", args.k, lambda, method);
            println!("{:>6}  {:>24}  {:>24}  {:>24}", "n", "probability", "log_probability", "cumulative");
            let mut cumulative = 0.0;
            for e in &table.entries {
                cumulative += e.probability;
                println!("{:>6}  {:>24.17e}  {:>24.17e}  {:>24.17e}", e.n, e.probability, e.log_probability, cumulative);
            }
            println!("cumulative = {:.17e}", table.cumulative);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_exact(args: ExactArgs) -> Result<ExitCode, CliError> {
    if args.k < 1 {
        return Err(config_error("--k must be at least 1"));
    }
    let method = MethodKind::from(args.method);
    check_method_k(method, args.k)?;
    let poly = pmf_polynomial(method, args.k, args.n)?;
    match args.format {
        Format::Json => println!("{}", poly.to_json()),
        Format::Text | Format::Csv => println!("{}", poly.display_text(args.ascii)),
    }
    Ok(ExitCode::SUCCESS)
}

fn grid_orders(k: Option<u64>) -> Result<Vec<u64>, CliError> {
    match k {
        Some(0) => Err(config_error("--k must be at least 1")),
        Some(k) => Ok(vec![k]),
        None => Ok((1..=6).collect()),
    }
}

fn dedup_methods(methods: &[MethodArg]) -> Vec<MethodKind> {
    let mut out: Vec<MethodKind> = Vec::new();
    for m in methods {
        let m = MethodKind::from(*m);
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let orders = grid_orders(args.k)?;
    let methods = dedup_methods(&args.methods);
    if methods.is_empty() {
        return Err(config_error("--methods must name at least one engine"));
    }
    if methods.contains(&MethodKind::K2) && orders != [2] {
        return Err(config_error("method k2 requires --k 2"));
    }

    // fact name -> first counterexample
    let mut failures: Vec<(&'static str, String)> = Vec::new();
    let record = |failures: &mut Vec<(&'static str, String)>, fact: &'static str, detail: String| {
        if !failures.iter().any(|(f, _)| *f == fact) {
            failures.push((fact, detail));
        }
    };

    for &k in &orders {
        for n in 0..=args.n_max {
            let polys: Vec<(MethodKind, LambdaPolynomial)> = methods
                .iter()
                .map(|&m| pmf_polynomial(m, k, n).map(|p| (m, p)))
                .collect::<Result<_, _>>()?;
            let (ref_method, reference) = &polys[0];
            for (m, p) in &polys[1..] {
                if p != reference {
                    record(
                        &mut failures,
                        "method-equality",
                        format!("k={k} n={n}: {m} != {ref_method}"),
                    );
                }
            }
            if n == 0 {
                if reference != &LambdaPolynomial::one() {
                    record(&mut failures, "p0-is-one", format!("k={k}: p_0 polynomial is not 1"));
                }
                continue;
            }
            if reference.degree() != Some(n) {
                record(&mut failures, "degree", format!("k={k} n={n}: degree {:?}", reference.degree()));
            }
            let inv_nfact = Rational::from_ratio(1.into(), poisson_order_k::factorial(n).into());
            if reference.coefficient(n) != inv_nfact {
                record(
                    &mut failures,
                    "leading-coefficient",
                    format!("k={k} n={n}: leading coefficient {}", reference.coefficient(n)),
                );
            }
            if !reference.coefficient(0).is_zero() {
                record(&mut failures, "no-constant-term", format!("k={k} n={n}"));
            }
            let r = BlockIndex::from_n(k, n).r;
            if reference.min_degree() != Some(r + 1) {
                record(
                    &mut failures,
                    "min-degree",
                    format!("k={k} n={n}: min degree {:?}, expected {}", reference.min_degree(), r + 1),
                );
            }
            if reference.terms().any(|(_, c)| !c.is_positive()) {
                record(&mut failures, "positive-coefficients", format!("k={k} n={n}"));
            }
        }
    }

    let facts = [
        "method-equality",
        "p0-is-one",
        "degree",
        "leading-coefficient",
        "no-constant-term",
        "min-degree",
        "positive-coefficients",
    ];
    let grid = match args.k {
        Some(k) => format!("k={k}"),
        None => "k=1..6".to_string(),
    };
    let method_names: Vec<&str> = methods.iter().map(|m| m.as_str()).collect();
    for fact in facts {
        match failures.iter().find(|(f, _)| *f == fact) {
            Some((_, detail)) => println!("FAIL {fact} ({detail})"),
            None => println!(
                "PASS {fact} {grid} n=0..{} methods={}",
                args.n_max,
                method_names.join(",")
            ),
        }
    }
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_MISMATCH))
    }
}

fn cmd_census(args: CensusArgs) -> Result<ExitCode, CliError> {
    let orders = grid_orders(args.k)?;
    let methods = dedup_methods(&args.methods);
    if methods.is_empty() {
        return Err(config_error("--methods must name at least one engine"));
    }
    for m in &methods {
        if !matches!(m, MethodKind::Km | MethodKind::Alt) {
            return Err(config_error(format!("census supports only km and alt, got {m}")));
        }
    }
    let with_km = methods.contains(&MethodKind::Km);
    let with_alt = methods.contains(&MethodKind::Alt);

    let mut header = vec!["k".to_string(), "n".to_string()];
    if with_km {
        header.extend(["km_total".into(), "km_low_degree".into()]);
    }
    if with_alt {
        header.extend(["alt_total".into(), "alt_low_degree".into()]);
    }
    if with_km {
        header.push("savings_ratio".into());
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut sums = (0u64, 0u64, 0u64, 0u64); // km_total, km_low, alt_total, alt_low
    for &k in &orders {
        for n in 1..=args.n_max {
            let mut row = vec![k.to_string(), n.to_string()];
            if with_km {
                let c = term_census(MethodKind::Km, k, n)?;
                sums.0 += c.total_terms;
                sums.1 += c.low_degree_terms;
                row.extend([c.total_terms.to_string(), c.low_degree_terms.to_string()]);
            }
            if with_alt {
                let c = term_census(MethodKind::Alt, k, n)?;
                sums.2 += c.total_terms;
                sums.3 += c.low_degree_terms;
                row.extend([c.total_terms.to_string(), c.low_degree_terms.to_string()]);
            }
            if with_km {
                let c = term_census(MethodKind::Km, k, n)?;
                row.push(format!("{:.4}", c.low_degree_terms as f64 / c.total_terms.max(1) as f64));
            }
            rows.push(row);
        }
    }

    let summary = {
        let mut s = String::from("summary:");
        if with_km {
            s.push_str(&format!(
                " km_total={} km_low_degree={} savings_ratio={:.4}",
                sums.0,
                sums.1,
                sums.1 as f64 / sums.0.max(1) as f64
            ));
        }
        if with_alt {
            s.push_str(&format!(" alt_total={} alt_low_degree={}", sums.2, sums.3));
        }
        s
    };

    match args.format {
        Format::Csv | Format::Json => {
            println!("{}", header.join(","));
            for row in &rows {
                println!("{}", row.join(","));
            }
            eprintln!("{summary}");
        }
        Format::Text => {
            println!("{}", header.join("\t"));
            for row in &rows {
                println!("{}", row.join("\t"));
            }
            println!("{summary}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_term_count(method: MethodKind, k: u64, n: u64) -> u64 {
    match method {
        MethodKind::Km | MethodKind::Alt => term_census(method, k, n).map(|c| c.total_terms).unwrap_or(0),
        MethodKind::Oracle => enumerate_compositions(k, n).count() as u64,
        MethodKind::K2 => n / 2 + 1,
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    if args.k < 1 {
        return Err(config_error("--k must be at least 1"));
    }
    if args.rounds < 1 {
        return Err(config_error("--rounds must be at least 1"));
    }
    let methods = dedup_methods(&args.methods);
    for &m in &methods {
        check_method_k(m, args.k)?;
    }
    println!("method,k,n,median_ns,term_count");
    for &method in &methods {
        for n in 1..=args.n_max {
            let mut samples: Vec<u128> = (0..args.rounds)
                .map(|_| {
                    let start = Instant::now();
                    let poly = pmf_polynomial(method, args.k, n).expect("validated above");
                    let elapsed = start.elapsed().as_nanos();
                    std::hint::black_box(poly);
                    elapsed
                })
                .collect();
            samples.sort_unstable();
            let median = samples[samples.len() / 2];
            println!("{},{},{},{},{}", method, args.k, n, median, bench_term_count(method, args.k, n));
        }
    }
    Ok(ExitCode::SUCCESS)
}
