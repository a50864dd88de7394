//! `wcoupling`: command-line front end for the coupling library.
//!
//! Exit status: 0 when every check passes, 1 when a law is violated, 2 for
//! malformed input (including a lift whose marginal precondition fails).

mod output;
mod verbs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use wcoupling::io;
use wcoupling::lens::{
    check_lens_laws, check_lens_laws_pq, check_metric_lens, check_submetry, identity_lens, submetry_to_lifting, MetricMode,
};
use wcoupling::lift::{
    check_lens_functoriality, check_lift_delta_laws, check_pushforward_conditional, check_pushforward_embedding, check_pushforward_functor,
    check_weight_preservation, LiftedCoupling,
};
use wcoupling::ot::{brute_force_wasserstein, check_optimization_complete as ot_complete, solve_transport, BRUTE_FORCE_MAX};
use wcoupling::prob::{bayes_check, compose, cost_triangle_check, pushforward_coupling, pushforward_measure, Coupling, FiniteSpace};
use wcoupling::sample::{random_coupling, random_coupling_from, random_measure, rng};
use wcoupling::wcat::{
    check_dagger, check_embedding, check_normed, check_optimization_complete as wcat_complete, check_pq_metric, check_weighted_category,
    check_weighted_functor, classify_pair, optimize, PairClass,
};
use wcoupling::{Error, Lens, Result};

use output::{Item, Output};

#[derive(Parser)]
#[command(name = "wcoupling", version, about = "Couplings, optimal transport and lens lifts on finite spaces")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Tolerance for every law check.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal k-cost between two measures on a space with a cost matrix.
    Wasserstein {
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Cross-check against brute-force enumeration (small inputs only).
        #[arg(long)]
        oracle: bool,
        space: PathBuf,
        p: PathBuf,
        q: PathBuf,
    },
    /// Glue two couplings on one space: T after S.
    Compose {
        #[arg(long, default_value_t = 1)]
        k: u32,
        space: PathBuf,
        s: PathBuf,
        t: PathBuf,
    },
    /// Push a coupling on the domain of a map forward to the codomain.
    Push {
        map: PathBuf,
        s: PathBuf,
        /// A second coupling, glued after S, for the functoriality check.
        #[arg(long)]
        then: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random couplings used by the embedding check.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Lift a coupling on the codomain of a lens along it, anchored at P.
    Lift { lens: PathBuf, p: PathBuf, s: PathBuf },
    /// Lift laws on random anchors and couplings for one lens.
    Verify {
        lens: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
    /// Lens laws, and metric lens and submetry checks when both spaces have costs.
    LensCheck {
        lens: PathBuf,
        /// Identity law up to distance tol, and no symmetry requirement.
        #[arg(long)]
        pq: bool,
        /// Replace the lift by the one built from the submetry witnesses.
        #[arg(long)]
        from_submetry: bool,
    },
    /// Weighted category checks and its optimization.
    Opt {
        category: PathBuf,
        #[arg(long)]
        dagger: Option<PathBuf>,
        #[arg(long, requires = "into")]
        functor: Option<PathBuf>,
        /// Target category of the functor.
        #[arg(long, requires = "functor")]
        into: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn labels(s: &FiniteSpace<f64>) -> Vec<String> {
    s.labels().to_vec()
}

fn coupling_item(s: &Coupling<f64>) -> Item {
    Item::Matrix { rows: labels(s.source().space()), cols: labels(s.target().space()), data: s.joint().clone() }
}

fn need_cost<'a>(s: &'a FiniteSpace<f64>, what: &str) -> Result<&'a ndarray::Array2<f64>> {
    s.cost().ok_or_else(|| Error::Argument(format!("{what} has no cost matrix")))
}

fn costs(l: &Lens) -> Option<(&ndarray::Array2<f64>, &ndarray::Array2<f64>)> {
    Some((l.domain().cost()?, l.codomain().cost()?))
}

fn run(cli: &Cli) -> Result<Output> {
    let tol = cli.tol;
    match &cli.command {
        Command::Wasserstein { k, oracle, space, p, q } => {
            let x = Arc::new(io::parse_space(&read(space)?)?);
            let cost = need_cost(&x, "space")?;
            let (p, q) = (io::parse_measure(&read(p)?, &x)?, io::parse_measure(&read(q)?, &x)?);
            let sol = solve_transport(&p, &q, cost, *k)?;
            let mut out = Output::new("wasserstein");
            out.item("value", Item::Number(sol.value));
            out.item("plan", coupling_item(&sol.plan));
            if *oracle {
                if x.len() <= BRUTE_FORCE_MAX {
                    let b = brute_force_wasserstein(&p, &q, cost, *k)?;
                    out.item("oracle", Item::Number(b));
                    let agree = (b.is_infinite() && sol.value.is_infinite()) || (b - sol.value).abs() <= tol;
                    out.item("oracle-agrees", Item::Text(agree.to_string()));
                    if !agree {
                        out.mismatch(format!("simplex value {} differs from brute force {b}", sol.value));
                    }
                } else {
                    out.item("oracle", Item::Text(format!("skipped, more than {BRUTE_FORCE_MAX} points")));
                }
            }
            out.check("ot::check_optimization_complete", ot_complete(&[p, q], cost, *k, tol)?);
            Ok(out)
        }
        Command::Compose { k, space, s, t } => {
            let x = Arc::new(io::parse_space(&read(space)?)?);
            let s = io::parse_coupling(&read(s)?, &x, &x)?;
            let t = io::parse_coupling(&read(t)?, &x, &x)?;
            let ts = compose(&t, &s, tol)?;
            let mut out = Output::new("compose");
            out.item("composite", coupling_item(&ts));
            out.check("prob::bayes_check", bayes_check(&ts, tol));
            if let Some(cost) = x.cost() {
                out.item("cost", Item::Number(wcoupling::prob::cost_k(&ts, cost, *k)?));
                out.check("prob::cost_triangle_check", cost_triangle_check(&s, &t, cost, *k, tol)?);
            }
            Ok(out)
        }
        Command::Push { map, s, then, seed, samples } => {
            let f = io::parse_point_map(&read(map)?)?;
            let s = io::parse_coupling(&read(s)?, f.domain(), f.domain())?;
            let pushed = pushforward_coupling(&f, &s)?;
            let mut out = Output::new("push");
            out.item("pushforward", coupling_item(&pushed));
            out.check("lift::check_pushforward_conditional", check_pushforward_conditional(&f, &s, tol)?);
            if let Some(t) = then {
                let t = io::parse_coupling(&read(t)?, f.domain(), f.domain())?;
                out.check("lift::check_pushforward_functor", check_pushforward_functor(&f, &s, &t, tol)?);
            }
            if f.is_injective() {
                let mut r = rng(*seed);
                let (p, q) = (s.source().clone(), s.target().clone());
                let (ip, iq) = (pushforward_measure(&f, &p)?, pushforward_measure(&f, &q)?);
                let mut mine = vec![s.clone()];
                let mut image = vec![pushed.clone()];
                for _ in 0..*samples {
                    mine.push(random_coupling(&mut r, &p, &q, 3));
                    image.push(random_coupling(&mut r, &ip, &iq, 3));
                }
                let metric = f.domain().cost().zip(f.codomain().cost());
                let rep = check_pushforward_embedding(&f, &p, &q, &mine, &image, metric, &[1, 2, 3], tol)?;
                out.check("lift::check_pushforward_embedding", rep);
            }
            Ok(out)
        }
        Command::Lift { lens, p, s } => {
            let l = io::parse_lens(&read(lens)?)?;
            let p = io::parse_measure(&read(p)?, l.domain())?;
            let s = io::parse_coupling(&read(s)?, l.codomain(), l.codomain())?;
            let lifted = LiftedCoupling::new(&l, &p, &s)?;
            let mut out = Output::new("lift");
            out.item("lift", coupling_item(&lifted.result));
            out.check("lift::LiftedCoupling::check_invariants", lifted.check_invariants(&l, tol)?);
            Ok(out)
        }
        Command::Verify { lens, seed, cases } => {
            let l = io::parse_lens(&read(lens)?)?;
            let mut r = rng(*seed);
            let mut out = Output::new("verify");
            out.item("cases", Item::Text(cases.to_string()));
            let id = identity_lens(l.codomain().clone());
            let metric = costs(&l);
            for _ in 0..*cases {
                let p = random_measure(&mut r, l.domain(), 0.3);
                let fp = pushforward_measure(l.projection(), &p)?;
                let s = random_coupling_from(&mut r, &fp, l.codomain(), 0.3);
                let s2 = random_coupling_from(&mut r, s.target(), l.codomain(), 0.3);
                out.check("lift::check_lift_delta_laws", check_lift_delta_laws(&l, &p, &s, &s2, tol)?);
                if let Some((dx, dy)) = metric {
                    out.check("lift::check_weight_preservation", check_weight_preservation(&l, dx, dy, &p, &s, &[1, 2, 3], tol)?);
                }
                out.check("lift::check_lens_functoriality", check_lens_functoriality(&l, &id, &p, &s, tol)?);
            }
            if metric.is_none() {
                let mut note = wcoupling::LawReport::new();
                note.note("skipped: the lens spaces carry no cost matrices");
                out.check("lift::check_weight_preservation", note);
            }
            Ok(out)
        }
        Command::LensCheck { lens, pq, from_submetry } => {
            let mut l = io::parse_lens(&read(lens)?)?;
            let mut out = Output::new("lens-check");
            let metric = costs(&l).map(|(a, b)| (a.clone(), b.clone()));
            if *from_submetry {
                let (dx, dy) =
                    metric.as_ref().ok_or_else(|| Error::Argument("--from-submetry needs cost matrices on both spaces".into()))?;
                let lift = submetry_to_lifting(l.projection(), dx, dy, tol)?;
                l = Lens::from_map(l.projection().clone(), lift)?;
                out.item("lens", Item::Json(io::lens_value(&l)));
            }
            if *pq {
                let dx = need_cost(l.domain(), "lens domain")?;
                out.check("lens::check_lens_laws_pq", check_lens_laws_pq(&l, dx, tol)?.to_law_report());
            } else {
                out.check("lens::check_lens_laws", check_lens_laws(&l).to_law_report());
            }
            if let Some((dx, dy)) = &metric {
                let mode = if *pq { MetricMode::PseudoQuasi } else { MetricMode::Metric };
                out.check("lens::check_metric_lens", check_metric_lens(&l, dx, dy, mode, tol)?);
                out.check("lens::check_submetry", check_submetry(l.projection(), dx, dy, mode, tol)?);
            }
            Ok(out)
        }
        Command::Opt { category, dagger, functor, into } => {
            let c = io::parse_category(&read(category)?)?;
            let mut out = Output::new("opt");
            let opt = optimize(&c);
            out.item("distance", Item::Matrix { rows: opt.points().to_vec(), cols: opt.points().to_vec(), data: opt.dist().clone() });
            let n = c.objects().len();
            let mut pairs = Vec::new();
            for x in 0..n {
                for y in x + 1..n {
                    let class = match classify_pair(&c, x, y, tol) {
                        PairClass::Isomorphic => "isomorphic",
                        PairClass::QuasiIsomorphic => "quasi-isomorphic",
                        PairClass::Neither => "neither",
                    };
                    pairs.push(format!("{}~{}:{class}", c.objects()[x], c.objects()[y]));
                }
            }
            out.item("pairs", Item::Text(pairs.join(" ")));
            out.check("wcat::check_weighted_category", check_weighted_category(&c, tol)?);
            out.check("wcat::check_optimization_complete", wcat_complete(&c));
            out.check("wcat::check_pq_metric", check_pq_metric(opt.dist(), tol));
            let mut normed = wcoupling::LawReport::new();
            normed.note(if check_normed(&c, tol) { "normed" } else { "not normed" });
            out.check("wcat::check_normed", normed);
            let mut classes = wcoupling::LawReport::new();
            classes.note(format!("{} pairs classified", pairs.len()));
            out.check("wcat::classify_pair", classes);
            if let Some(d) = dagger {
                let table = io::parse_dagger(&read(d)?, &c)?;
                out.check("wcat::check_dagger", check_dagger(&c, &table, tol)?);
            }
            if let (Some(f), Some(d)) = (functor, into) {
                let d = io::parse_category(&read(d)?)?;
                let f = io::parse_functor(&read(f)?, &c, &d)?;
                out.check("wcat::check_weighted_functor", check_weighted_functor(&f, &c, &d, tol)?);
                out.check("wcat::check_embedding", check_embedding(&f, &c, &d, tol)?);
            }
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Text => out.text(),
                Format::Json => out.json(),
            };
            print!("{text}");
            if out.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
