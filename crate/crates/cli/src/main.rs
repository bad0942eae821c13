//! `heightzeta`: heights, lattice series, point counts and Tamagawa numbers from the shell.

mod output;
mod parse;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heightzeta_core::arakelov::{
    grouped_series_coefficients, series_terms, theta_duality_defect, ArakelovSeriesSpec, PhiKind,
};
use heightzeta_core::counts::{count_table, fit_asymptotics, geometric_thresholds, height_zeta_partial};
use heightzeta_core::fibration::{
    anticanonical_class, character_shift_invariance, enumerate_fn_capped, height_fn, is_effective, normalize,
    DEFAULT_FN_CAPACITY,
};
use heightzeta_core::heights::{height_adelic, height_point, AdelicPoint};
use heightzeta_core::lattice::DEFAULT_CAPACITY;
use heightzeta_core::places::format_rat;
use heightzeta_core::tamagawa::{peyre_constant_check, tamagawa_number, TamagawaReport};
use heightzeta_core::twist::{compare_twisted, twisted_height};
use heightzeta_core::{
    selftest, AdelicGroupElement, ArchKind, Complex64, Error, FibrationLineClass, FitModel, FnPoint, Magnitude,
    MetrizedLineBundle, Place, ProjPoint, Result, Section, SeriesValue, TamagawaSpec, Variety,
};
use output::{dec, out_line, print_json, Format, Table, PRECISION_BITS, SCHEMA_VERSION};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "heightzeta",
    version,
    about = "Heights of rational points, lattice theta and zeta functions, point counts and Tamagawa numbers over Q"
)]
#[command(
    after_help = "Exit codes: 0 success, 1 selftest failure, 2 invalid input, 3 capacity exceeded.\n\
Decimal output is IEEE binary64 (53-bit) in shortest round-trip form; exact values are printed as p/q or sqrt(p/q)."
)]
struct Cli {
    #[command(flatten)]
    config: Config,

    /// Run the built-in property checks and exit nonzero on any failure.
    #[arg(long)]
    selftest: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Config {
    /// Working precision in bits; only IEEE double precision (53) is available.
    #[arg(long, global = true, default_value_t = PRECISION_BITS)]
    precision_bits: u32,

    /// Default target error for series and quadrature.
    #[arg(long, global = true, default_value_t = 1e-12)]
    eps: f64,

    /// Output format for tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Worker threads (0: one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Cap on the number of points or vectors one enumeration may produce.
    #[arg(long, global = true)]
    max_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Height of a point of P^n for O(m): `height <n> <m> <max|l2> <x0> … <xn>`.
    #[command(allow_negative_numbers = true)]
    Height {
        n: usize,
        m: i64,
        arch: ArchKind,
        /// Rational coordinates.
        #[arg(required = true)]
        coords: Vec<String>,
        /// Evaluate `Π_v ‖s‖_v(x_v)^{-1}` for this section instead, e.g. `x0*x1 + 2*x1^2`.
        #[arg(long)]
        section: Option<String>,
        /// Replace the point at one place: `<place>:<c0>,<c1>,…` (repeatable).
        #[arg(long = "at", allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Height twisted by an adelic matrix read from a file (`rank n`, then `place v` blocks).
    #[command(allow_negative_numbers = true)]
    Twist {
        #[arg(long)]
        file: String,
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long, default_value = "max")]
        arch: ArchKind,
        #[arg(required = true)]
        coords: Vec<String>,
        /// Print both sides of the weight comparison for a monomial section.
        #[arg(long)]
        compare: bool,
        /// Monomial section used by --compare (default x0^m).
        #[arg(long)]
        section: Option<String>,
    },
    /// Theta, zeta and completed Lambda of a lattice. Gram: `I<d>` or a file with a `rank d` header.
    Lattice {
        #[command(subcommand)]
        op: LatticeOp,
    },
    /// Arakelov series over the rational points of P¹.
    ///
    /// CSV of --terms: height_squared,u,v,vol,lattice_re,lattice_im,term_re,term_im,error_bound.
    Arakelov {
        /// Degrees of the summands of the bundle, e.g. `1,2`.
        #[arg(long, allow_hyphen_values = true)]
        degrees: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long)]
        cutoff: u64,
        #[arg(long, default_value = "theta")]
        phi: PhiKind,
        #[arg(long, default_value = "max")]
        arch: ArchKind,
        /// Print one row per rational point.
        #[arg(long)]
        terms: bool,
        /// Print the termwise duality defect against the dual series at 1 − s.
        #[arg(long)]
        duality: bool,
        /// Print the height-grouped table for O(1) with the max metric: N, count, 4φ(N), printed 2(1+2φ(N)).
        #[arg(long)]
        grouped: bool,
    },
    /// Number of points of P^n with H_{O(m)} ≤ H, for each threshold.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long)]
        arch: ArchKind,
        /// Comma-separated thresholds.
        #[arg(long = "H")]
        h: String,
    },
    /// Partial height zeta function Σ_{H(x) ≤ H} H(x)^{-s} on P^n.
    Zeta {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long)]
        arch: ArchKind,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long = "H")]
        h: f64,
    },
    /// Fit N(H) ≈ θ H^a (log H)^{b−1} on geometric thresholds.
    Fit {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long)]
        arch: ArchKind,
        #[arg(long = "H-min")]
        h_min: f64,
        #[arg(long = "H-max")]
        h_max: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
        /// Pin the exponent a.
        #[arg(long)]
        a: Option<f64>,
        /// Pin the exponent b.
        #[arg(long)]
        b: Option<f64>,
    },
    /// Hirzebruch surfaces F_n as P¹-bundles over P¹.
    Hirzebruch {
        #[command(subcommand)]
        op: HirzebruchOp,
    },
    /// Tamagawa number as a JSON report.
    Tamagawa {
        /// `P<n>` or `F<n>`.
        #[arg(long, default_value = "P1")]
        variety: Variety,
        #[arg(long, default_value = "max")]
        arch: ArchKind,
        /// Euler product over primes up to this bound.
        #[arg(long = "P", default_value_t = 100_000)]
        prime_cutoff: u64,
        /// Primes without convergence factors, e.g. `2,3`.
        #[arg(long)]
        sigma: Option<String>,
        /// Compare α β τ with the constant fitted to anticanonical counts on P^n (n ∈ {1, 2}).
        #[arg(long)]
        peyre_check: bool,
        /// Anticanonical height bound for --peyre-check.
        #[arg(long = "H", default_value_t = 1e6)]
        h: f64,
        /// Target error of the archimedean quadrature.
        #[arg(long, default_value_t = 1e-10)]
        quad_eps: f64,
    },
}

#[derive(Subcommand)]
enum LatticeOp {
    /// θ(L, t). CSV: value,error_bound,terms,rigorous,precision_bits.
    Theta {
        #[arg(long)]
        gram: String,
        #[arg(long)]
        t: f64,
    },
    /// ζ(L, s) by analytic continuation. CSV: value_re,value_im,error_bound,terms,rigorous,precision_bits.
    Zeta {
        #[arg(long)]
        gram: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Completed Λ(L, s). Same columns as zeta.
    Lambda {
        #[arg(long)]
        gram: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Functional-equation defects of θ at t and of Λ at s.
    CheckFe {
        #[arg(long)]
        gram: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, allow_hyphen_values = true, default_value = "0.3+0.7i")]
        s: String,
    },
}

#[derive(Args)]
struct ClassArgs {
    #[arg(long)]
    n: i64,
    /// Line class `k,w,j`.
    #[arg(long, allow_hyphen_values = true, default_value = "2,1,2")]
    class: String,
    #[arg(long, default_value = "max")]
    arch: ArchKind,
}

#[derive(Subcommand)]
enum HirzebruchOp {
    /// Height of `u,v,s,t` (base (u:v), fiber (s,t)).
    Height {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Points of height at most H. CSV: u,v,s,t,height.
    Enumerate {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long = "H")]
        h: f64,
    },
    /// Heights under the class and its character-shifted representative.
    CheckShift {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// The anticanonical class and its effectivity.
    Anticanonical {
        #[arg(long)]
        n: i64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let reason = match &e {
                Error::InvalidInput(msg) => msg.clone(),
                other => other.to_string(),
            };
            eprintln!("error: {}: {}", e.kind(), reason.replace('\n', " "));
            ExitCode::from(if e.is_capacity() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = cli.config;
    if cfg.precision_bits != PRECISION_BITS {
        return Err(Error::invalid(format!(
            "precision_bits {} unsupported (only 53)",
            cfg.precision_bits
        )));
    }
    if !(cfg.eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    if cli.selftest {
        return Ok(run_selftest());
    }
    let Some(command) = cli.command else {
        return Err(Error::invalid("no subcommand given (see --help)"));
    };
    match command {
        Command::Height {
            n,
            m,
            arch,
            coords,
            section,
            overrides,
        } => height(&cfg, n, m, arch, &coords, section, &overrides)?,
        Command::Twist {
            file,
            m,
            arch,
            coords,
            compare,
            section,
        } => twist(&cfg, &file, m, arch, &coords, compare, section)?,
        Command::Lattice { op } => lattice(&cfg, op)?,
        Command::Arakelov {
            degrees,
            s,
            cutoff,
            phi,
            arch,
            terms,
            duality,
            grouped,
        } => {
            let spec = ArakelovSeriesSpec {
                degrees: parse::int_list(&degrees)?,
                arch,
                s: parse::complex(&s)?,
                cutoff,
                phi,
            };
            arakelov(&cfg, spec, terms, duality, grouped)?
        }
        Command::Count { n, m, arch, h } => {
            let table = count_table(&MetrizedLineBundle::new(n, m, arch)?, &parse::float_list(&h)?)?;
            let mut t = Table::new("count", &["H", "count"]);
            for (h, c) in h.split(',').zip(&table.counts) {
                t.push(vec![h.trim().to_string(), c.to_string()]);
            }
            emit(&t, cfg.format)?;
        }
        Command::Zeta { n, m, arch, s, h } => {
            let v = height_zeta_partial(&MetrizedLineBundle::new(n, m, arch)?, parse::complex(&s)?, h)?;
            emit(&series_table("height-zeta", &v), cfg.format)?;
        }
        Command::Fit {
            n,
            m,
            arch,
            h_min,
            h_max,
            points,
            a,
            b,
        } => {
            let table = count_table(
                &MetrizedLineBundle::new(n, m, arch)?,
                &geometric_thresholds(h_min, h_max, points),
            )?;
            let fit = fit_asymptotics(
                &table,
                FitModel {
                    a,
                    b,
                    ..FitModel::default()
                },
            )?;
            let mut t = Table::new("fit", &["a", "b", "theta", "residual"]);
            t.push(vec![dec(fit.a), dec(fit.b), dec(fit.theta), dec(fit.residual)]);
            emit(&t, cfg.format)?;
        }
        Command::Hirzebruch { op } => hirzebruch(&cfg, op)?,
        Command::Tamagawa {
            variety,
            arch,
            prime_cutoff,
            sigma,
            peyre_check,
            h,
            quad_eps,
        } => {
            let sigma = match sigma {
                Some(s) => parse::int_list(&s)?
                    .into_iter()
                    .map(|p| u64::try_from(p).map_err(|_| Error::invalid("negative prime")))
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            };
            if peyre_check {
                let Variety::Pn(n) = variety else {
                    return Err(Error::invalid("--peyre-check needs a projective space P1 or P2"));
                };
                if !sigma.is_empty() {
                    return Err(Error::invalid("--peyre-check does not take --sigma"));
                }
                let c = peyre_constant_check(n, arch, prime_cutoff, h)?;
                print_json(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "kind": "peyre-check",
                    "precision_bits": PRECISION_BITS,
                    "variety": variety.to_string(),
                    "arch": arch.to_string(),
                    "anticanonical_height_bound": h,
                    "predicted": c.predicted,
                    "fitted": c.fitted,
                    "relative_gap": c.relative_gap(),
                    "tau": c.tau.tau,
                    "fit_residual": c.fit.residual,
                }));
            } else {
                let spec = TamagawaSpec::new(variety, arch, prime_cutoff)
                    .with_sigma(sigma)
                    .with_quad_eps(quad_eps);
                print_json(&tamagawa_json(&tamagawa_number(&spec)?));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn emit(t: &Table, format: Format) -> Result<()> {
    t.emit(format).map_err(|e| Error::invalid(format!("write failed: {e}")))
}

fn run_selftest() -> ExitCode {
    let checks = selftest::run();
    let mut failed = 0;
    for c in &checks {
        out_line(&format!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
        failed += usize::from(!c.passed);
    }
    out_line(&format!("{} of {} checks passed", checks.len() - failed, checks.len()));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn print_magnitude(cfg: &Config, kind: &str, h: &Magnitude) {
    match cfg.format {
        Format::Csv => {
            out_line(&h.to_string());
            out_line(&format!("~ {} (binary64, {PRECISION_BITS} bits)", dec(h.to_f64())));
        }
        Format::Json => print_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "kind": kind,
            "precision_bits": PRECISION_BITS,
            "exact": h.to_string(),
            "decimal": h.to_f64(),
        })),
    }
}

fn point(coords: &[String]) -> Result<ProjPoint> {
    ProjPoint::from_rats(&parse::rationals(coords)?)
}

fn height(
    cfg: &Config,
    n: usize,
    m: i64,
    arch: ArchKind,
    coords: &[String],
    section: Option<String>,
    overrides: &[String],
) -> Result<()> {
    let bundle = MetrizedLineBundle::new(n, m, arch)?;
    let x = point(coords)?;
    if x.coords().len() != n + 1 {
        return Err(Error::invalid(format!(
            "P^{n} needs {} coordinates, got {}",
            n + 1,
            x.coords().len()
        )));
    }
    let h = match section {
        None if overrides.is_empty() => height_point(&bundle, &x)?,
        _ => {
            let s = match section {
                Some(text) => Section::parse(n + 1, &text)?,
                None => Section::monomial(monomial_x0(n, m)?),
            };
            let mut pt = AdelicPoint::rational(x);
            for o in overrides {
                let (place, rest) = o
                    .split_once(':')
                    .ok_or_else(|| Error::invalid(format!("override {o:?} should read <place>:<coords>")))?;
                let coords: Vec<String> = rest.split(',').map(str::to_string).collect();
                pt = pt.with_override(place.parse::<Place>()?, parse::rationals(&coords)?)?;
            }
            height_adelic(&bundle, &s, &pt)?
        }
    };
    print_magnitude(cfg, "height", &h);
    Ok(())
}

fn monomial_x0(n: usize, m: i64) -> Result<Vec<u32>> {
    let m = u32::try_from(m).map_err(|_| Error::invalid("sections exist only for m ≥ 0"))?;
    let mut e = vec![0; n + 1];
    e[0] = m;
    Ok(e)
}

fn twist(
    cfg: &Config,
    file: &str,
    m: i64,
    arch: ArchKind,
    coords: &[String],
    compare: bool,
    section: Option<String>,
) -> Result<()> {
    let g = AdelicGroupElement::parse(&parse::read_file(file)?)?;
    let n = g.size() - 1;
    let bundle = MetrizedLineBundle::new(n, m, arch)?;
    let x = point(coords)?;
    if x.coords().len() != g.size() {
        return Err(Error::invalid(format!(
            "twist has rank {}, point has {} coordinates",
            g.size(),
            x.coords().len()
        )));
    }
    if !compare {
        print_magnitude(cfg, "twisted-height", &twisted_height(&bundle, &g, &x)?);
        return Ok(());
    }
    let s = match section {
        Some(text) => Section::parse(n + 1, &text)?,
        None => Section::monomial(monomial_x0(n, m)?),
    };
    let (lhs, rhs) = compare_twisted(&bundle, &g, &s, &x)?;
    let mut t = Table::new("twist-compare", &["lhs", "rhs", "equal", "lhs_decimal", "rhs_decimal"]);
    t.push(vec![
        lhs.to_string(),
        rhs.to_string(),
        (lhs == rhs).to_string(),
        dec(lhs.to_f64()),
        dec(rhs.to_f64()),
    ]);
    emit(&t, cfg.format)
}

fn series_table(kind: &'static str, v: &SeriesValue) -> Table {
    let mut t = Table::new(
        kind,
        &[
            "value_re",
            "value_im",
            "error_bound",
            "terms",
            "rigorous",
            "precision_bits",
        ],
    );
    t.push(vec![
        dec(v.value.re),
        dec(v.value.im),
        dec(v.error_bound),
        v.terms_used.to_string(),
        v.rigorous.to_string(),
        PRECISION_BITS.to_string(),
    ]);
    t
}

fn lattice(cfg: &Config, op: LatticeOp) -> Result<()> {
    let load = |g: &str| parse::gram(g).map(|l| l.with_capacity(cfg.max_points.unwrap_or(DEFAULT_CAPACITY)));
    match op {
        LatticeOp::Theta { gram, t } => {
            let v = load(&gram)?.theta(t, cfg.eps)?;
            let mut table = Table::new(
                "theta",
                &["value", "error_bound", "terms", "rigorous", "precision_bits"],
            );
            table.push(vec![
                dec(v.value.re),
                dec(v.error_bound),
                v.terms_used.to_string(),
                v.rigorous.to_string(),
                PRECISION_BITS.to_string(),
            ]);
            emit(&table, cfg.format)
        }
        LatticeOp::Zeta { gram, s } => emit(
            &series_table("zeta", &load(&gram)?.lattice_zeta(parse::complex(&s)?, cfg.eps)?),
            cfg.format,
        ),
        LatticeOp::Lambda { gram, s } => emit(
            &series_table("lambda", &load(&gram)?.completed_lambda(parse::complex(&s)?, cfg.eps)?),
            cfg.format,
        ),
        LatticeOp::CheckFe { gram, t, s } => {
            let l = load(&gram)?;
            let s = parse::complex(&s)?;
            let (theta_defect, theta_bound) = l.theta_functional_equation_defect(t, cfg.eps)?;
            let a = l.completed_lambda(s, cfg.eps)?;
            let d = l.rank() as f64;
            let b = l.dual().completed_lambda(Complex64::new(d, 0.0) - s, cfg.eps)?;
            let lambda_defect = (a.value - b.value).norm();
            let lambda_bound = a.error_bound + b.error_bound;
            let mut table = Table::new("check-fe", &["identity", "at", "defect", "error_bound", "within_bound"]);
            table.push(vec![
                "theta".into(),
                dec(t),
                dec(theta_defect),
                dec(theta_bound),
                (theta_defect <= theta_bound).to_string(),
            ]);
            table.push(vec![
                "lambda".into(),
                format!("{}{:+}i", dec(s.re), s.im),
                dec(lambda_defect),
                dec(lambda_bound),
                (lambda_defect <= lambda_bound).to_string(),
            ]);
            emit(&table, cfg.format)
        }
    }
}

fn arakelov(cfg: &Config, spec: ArakelovSeriesSpec, terms: bool, duality: bool, grouped: bool) -> Result<()> {
    if grouped {
        if spec.degrees != [1] || spec.arch != ArchKind::Max || spec.phi != PhiKind::Theta {
            return Err(Error::invalid("--grouped is defined for degrees 1, max metric, theta"));
        }
        let g = grouped_series_coefficients(spec.cutoff, spec.s, cfg.eps)?;
        let mut t = Table::new("arakelov-grouped", &["N", "count", "theta", "printed_coefficient"]);
        for r in &g.rows {
            t.push(vec![
                r.height.to_string(),
                r.count.to_string(),
                dec(r.theta),
                r.printed_coefficient.to_string(),
            ]);
        }
        return emit(&t, cfg.format);
    }
    if duality {
        let (defect, bound) = theta_duality_defect(&spec, cfg.eps)?;
        let mut t = Table::new("arakelov-duality", &["defect", "error_bound"]);
        t.push(vec![dec(defect), dec(bound)]);
        return emit(&t, cfg.format);
    }
    let rows = series_terms(&spec, cfg.eps)?;
    if terms {
        let mut t = Table::new(
            "arakelov-terms",
            &[
                "height_squared",
                "u",
                "v",
                "vol",
                "lattice_re",
                "lattice_im",
                "term_re",
                "term_im",
                "error_bound",
            ],
        );
        for r in &rows {
            t.push(vec![
                r.height_squared.to_string(),
                r.point.0.to_string(),
                r.point.1.to_string(),
                dec(r.vol),
                dec(r.lattice_value.re),
                dec(r.lattice_value.im),
                dec(r.term.re),
                dec(r.term.im),
                dec(r.error_bound),
            ]);
        }
        return emit(&t, cfg.format);
    }
    let v = heightzeta_core::arakelov::arakelov_l_partial(&spec, cfg.eps)?;
    emit(&series_table("arakelov", &v), cfg.format)
}

fn class_of(c: &ClassArgs) -> Result<FibrationLineClass> {
    let [k, w, j] = parse::int_tuple::<3>(&c.class)?;
    Ok(FibrationLineClass::new(k, w, j))
}

fn fn_point(text: &str) -> Result<FnPoint> {
    let [u, v, s, t] = parse::int_tuple::<4>(text)?;
    FnPoint::new((u, v), (s, t))
}

fn hirzebruch(cfg: &Config, op: HirzebruchOp) -> Result<()> {
    match op {
        HirzebruchOp::Height { class, point } => {
            let c = class_of(&class)?;
            print_magnitude(
                cfg,
                "hirzebruch-height",
                &height_fn(class.n, &c, &fn_point(&point)?, class.arch),
            );
            Ok(())
        }
        HirzebruchOp::Enumerate { class, h } => {
            let c = class_of(&class)?;
            let (n, c, _) = normalize(class.n, &c, &FnPoint::new((1, 0), (1, 0))?);
            let pts = enumerate_fn_capped(n, &c, class.arch, h, cfg.max_points.unwrap_or(DEFAULT_FN_CAPACITY))?;
            let mut t = Table::new("hirzebruch-points", &["u", "v", "s", "t", "height"]);
            for p in &pts {
                let h = height_fn(n, &c, p, class.arch);
                t.push(vec![
                    p.base.0.to_string(),
                    p.base.1.to_string(),
                    p.fiber.0.to_string(),
                    p.fiber.1.to_string(),
                    h.to_string(),
                ]);
            }
            emit(&t, cfg.format)
        }
        HirzebruchOp::CheckShift { class, point } => {
            let c = class_of(&class)?;
            let s = c.shifted(class.n);
            let (h1, h2) = character_shift_invariance(class.n, &c, &fn_point(&point)?, class.arch);
            let mut t = Table::new(
                "hirzebruch-shift",
                &["class", "shifted_class", "height", "shifted_height", "equal"],
            );
            t.push(vec![
                format!("{},{},{}", c.k, c.w, c.j),
                format!("{},{},{}", s.k, s.w, s.j),
                h1.to_string(),
                h2.to_string(),
                (h1 == h2).to_string(),
            ]);
            emit(&t, cfg.format)
        }
        HirzebruchOp::Anticanonical { n } => {
            let c = anticanonical_class(n);
            let mut t = Table::new("hirzebruch-anticanonical", &["n", "k", "w", "j", "effective"]);
            t.push(vec![
                n.to_string(),
                c.k.to_string(),
                c.w.to_string(),
                c.j.to_string(),
                is_effective(n, &c).to_string(),
            ]);
            emit(&t, cfg.format)
        }
    }
}

fn tamagawa_json(r: &TamagawaReport) -> serde_json::Value {
    let factors: Vec<_> = r
        .factors
        .iter()
        .map(|f| {
            json!({
                "p": f.p,
                "local_density": format_rat(&f.density),
                "convergence_factor": format_rat(&f.convergence),
                "product": format_rat(&f.product()),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "tamagawa",
        "precision_bits": PRECISION_BITS,
        "variety": r.spec.variety.to_string(),
        "arch": r.spec.arch.to_string(),
        "prime_cutoff": r.spec.prime_cutoff,
        "sigma": r.spec.sigma,
        "factors": factors,
        "mu_infinity": r.mu_infinity,
        "mu_infinity_error": r.mu_infinity_error,
        "l_star": r.l_star,
        "euler_product": r.euler_product,
        "tau": r.tau,
        "error_budget": { "tail": r.tail_error, "total": r.error },
    })
}
