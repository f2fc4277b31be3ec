use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use perfeq::charges::NatMap;
use perfeq::finite::{
    is_nash_witnessed, perfect_candidate_np_with, perfect_decide_2p, weak_dominance, Dominance, FiniteGame, MixedProfile,
    NpOptions, NpVerdict, Perfection2p, Refutation,
};
use perfeq::integration::integrate_bracket;
use perfeq::invariance::{pushforward_check, reduced_form, respects_payoffs, ActionMap, Respect};
use perfeq::io::{family, parse_charge_profile, parse_profile, read_game, read_witness, GameFile};
use perfeq::perfection::{scenario_names, scenario_verify, verify_perfection_witness};
use perfeq::report::{Check, Report, Status, REPORT_VERSION};
use perfeq::{Error, Rational};

#[derive(Parser)]
#[command(name = "perfeq", version, about = "Exact checks for Nash and perfect equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Tolerance for bracketed payoffs, as p/q.
    #[arg(long, default_value = "1/1000000", global = true)]
    tol: Rational,
    /// Horizon up to which pure actions are compared one by one.
    #[arg(long, default_value_t = 64, global = true)]
    horizon: u64,
    /// Seed for randomized searches.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Test profiles for Nash equilibrium.
    Nash {
        game: PathBuf,
        /// Profile such as "(1/2,1/2);(1,0)"; defaults to those in the file.
        #[arg(long)]
        profile: Vec<String>,
    },
    /// Certify (two players) or test (more players) perfection.
    Perfect {
        game: PathBuf,
        #[arg(long)]
        profile: Vec<String>,
    },
    /// Decide weak dominance of a mixed strategy.
    Dominance {
        game: PathBuf,
        /// Player, counted from 1.
        #[arg(long)]
        player: usize,
        /// Strategy such as "(1/2,1/2,0)".
        #[arg(long)]
        strategy: String,
    },
    /// Bracket expected payoffs of a charge profile.
    Integrate {
        /// Game family name or game file.
        #[arg(long)]
        game: String,
        /// Charges separated by `;`, e.g. "diffuse;delta(2)".
        #[arg(long)]
        profile: String,
    },
    /// Verify a perfection witness file.
    Witness { file: PathBuf },
    /// Check that an action map respects payoffs and push perfect profiles forward.
    Pushforward {
        source: PathBuf,
        /// Defaults to the reduced form of the source.
        target: Option<PathBuf>,
        /// One map per player, e.g. "map{1->D, 2->U, 3->U}".
        #[arg(long)]
        map: Vec<String>,
        /// Profiles of the target allowed as images; defaults to all perfect pure profiles.
        #[arg(long)]
        allowed: Vec<String>,
    },
    /// Run a named scenario, or all of them.
    Scenario { name: Option<String> },
    /// Run randomized property checks.
    Selftest {
        #[arg(long, default_value_t = 64)]
        cases: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Nash { .. } => "nash",
            Command::Perfect { .. } => "perfect",
            Command::Dominance { .. } => "dominance",
            Command::Integrate { .. } => "integrate",
            Command::Witness { .. } => "witness",
            Command::Pushforward { .. } => "pushforward",
            Command::Scenario { .. } => "scenario",
            Command::Selftest { .. } => "selftest",
        }
    }
}

fn err_code(e: &Error) -> u8 {
    match e {
        Error::Inconclusive { .. } | Error::NoApproximant { .. } | Error::NonConvergence { .. } | Error::UndeterminedByBase { .. } => 2,
        _ => 3,
    }
}

fn finite(path: &PathBuf) -> Result<(String, FiniteGame, Vec<MixedProfile>), Error> {
    match read_game(path)? {
        GameFile::Finite { name, game, profiles } => Ok((name, game, profiles)),
        GameFile::Countable(g) => Err(Error::NotApplicable(format!(
            "{} has infinitely many actions; use `scenario {}`",
            g.name(),
            g.name()
        ))),
    }
}

fn profiles(game: &FiniteGame, given: &[String], in_file: Vec<MixedProfile>) -> Result<Vec<MixedProfile>, Error> {
    if given.is_empty() {
        if in_file.is_empty() {
            return Err(Error::invariant("no profile given and none in the game file"));
        }
        return Ok(in_file);
    }
    given.iter().map(|p| parse_profile(p, game.action_counts())).collect()
}

fn fmt_vec(v: &[Rational]) -> String {
    let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", s.join(","))
}

fn short(x: &Rational) -> String {
    let s = x.to_string();
    s.strip_suffix("/1").map(str::to_string).unwrap_or(s)
}

fn fmt_short(v: &[Rational]) -> String {
    let s: Vec<String> = v.iter().map(short).collect();
    format!("({})", s.join(","))
}

fn nash(path: &PathBuf, given: &[String]) -> Result<Report, Error> {
    let (name, game, in_file) = finite(path)?;
    let mut r = Report::new(format!("nash in {name}"));
    for p in profiles(&game, given, in_file)? {
        r.push(match is_nash_witnessed(&game, &p)? {
            None => Check::new(format!("{p} is Nash"), true),
            Some((i, a, gain)) => Check::new(format!("{p} is Nash"), false)
                .value("player", i + 1)
                .value("deviation", &game.labels(i)[a])
                .value("gain", gain),
        });
    }
    Ok(r)
}

fn refutation_check(claim: String, game: &FiniteGame, r: &Refutation) -> Check {
    match r {
        Refutation::NotNash { player, action, gain } => Check::new(claim, false)
            .value("player", player + 1)
            .value("deviation", &game.labels(*player)[*action])
            .value("gain", gain)
            .note("not perfect: not a Nash equilibrium"),
        Refutation::Dominated { player, by } => Check::new(claim, false)
            .value("player", player + 1)
            .value("by", fmt_vec(by))
            .note(format!("not perfect: dominated by {}", fmt_short(by))),
    }
}

fn perfect(path: &PathBuf, given: &[String], seed: u64) -> Result<Report, Error> {
    let (name, game, in_file) = finite(path)?;
    let mut r = Report::new(format!("perfection in {name}"));
    for p in profiles(&game, given, in_file)? {
        let claim = format!("{p} is perfect");
        if game.players() == 2 {
            r.push(match perfect_decide_2p(&game, &p)? {
                Perfection2p::Perfect { beliefs } => {
                    let mut c = Check::new(claim, true);
                    for (i, b) in beliefs.iter().enumerate() {
                        c = c.value(format!("belief_{}", i + 1), fmt_vec(b));
                    }
                    c
                }
                Perfection2p::NotPerfect(why) => refutation_check(claim, &game, &why),
            });
        } else {
            let schedule: Vec<Rational> = (1..=6).map(|k| Rational::new(1, 4i64.pow(k))).collect();
            let opts = NpOptions { seed, ..NpOptions::default() };
            r.push(match perfect_candidate_np_with(&game, &p, &schedule, &opts)? {
                NpVerdict::Refuted(why) => refutation_check(claim, &game, &why),
                v @ NpVerdict::Candidate(_) => {
                    let found = if let NpVerdict::Candidate(ev) = &v { ev.iter().filter(|(_, w)| w.is_some()).count() } else { 0 };
                    Check::inconclusive(claim, "candidate only: perfection is not certified for three or more players")
                        .value("trembles_found", format!("{found}/{}", schedule.len()))
                }
            });
        }
    }
    Ok(r)
}

fn dominance(path: &PathBuf, player: usize, strategy: &str) -> Result<Report, Error> {
    let (name, game, _) = finite(path)?;
    if player == 0 || player > game.players() {
        return Err(Error::ShapeMismatch(format!("player {player} in a {}-player game", game.players())));
    }
    let s: MixedProfile = strategy.parse()?;
    let row = s.rows().first().cloned().unwrap_or_default();
    let mut r = Report::new(format!("dominance in {name}"));
    let claim = format!("{} of player {player} is undominated", fmt_vec(&row));
    r.push(match weak_dominance(&game, player - 1, &row)? {
        Dominance::Undominated { belief } => Check::new(claim, true).value("belief", fmt_vec(&belief)),
        Dominance::DominatedBy(by) => Check::new(claim, false)
            .value("by", fmt_vec(&by))
            .note(format!("dominated by {}", fmt_short(&by))),
    });
    Ok(r)
}

fn integrate(game: &str, profile: &str, tol: &Rational) -> Result<Report, Error> {
    let g = match family(game) {
        Ok(g) => g,
        Err(_) => read_game(&PathBuf::from(game))?.countable(),
    };
    let prof = parse_charge_profile(profile)?;
    let mut r = Report::new(format!("integration in {}", g.name()));
    for i in 0..g.players() {
        let b = integrate_bracket(&prof, g.payoff(i), tol)?;
        let mut c = Check::new(format!("payoff of player {} is bracketed within {tol}", i + 1), b.width() <= *tol)
            .value("lower", &b.lower)
            .value("upper", &b.upper);
        if let Some(n) = b.index {
            c = c.value("approximant", n);
        }
        r.push(c);
    }
    Ok(r)
}

fn witness(file: &PathBuf) -> Result<Report, Error> {
    let w = read_witness(file)?;
    verify_perfection_witness(&w.game, &w.sigma, &w.carriers, &w.nbhd, &w.tau, &w.kappa, w.horizon, &w.tol)
}

fn pure_profiles(game: &FiniteGame) -> Vec<MixedProfile> {
    game.pure_profiles().map(|a| MixedProfile::pure(game.action_counts(), &a)).collect()
}

fn pushforward(source: &PathBuf, target: Option<&PathBuf>, maps: &[String], allowed: &[String]) -> Result<Report, Error> {
    let (name, src, in_file) = finite(source)?;
    let (tgt, phi) = match target {
        None => {
            if !maps.is_empty() {
                return Err(Error::invariant("--map needs a target game"));
            }
            reduced_form(&src)
        }
        Some(t) => {
            let (_, tgt, _) = finite(t)?;
            if maps.len() != src.players() {
                return Err(Error::ArityMismatch(format!("{} maps for {} players", maps.len(), src.players())));
            }
            let ms = maps
                .iter()
                .enumerate()
                .map(|(i, m)| NatMap::parse(m, Some(tgt.labels(i))))
                .collect::<Result<Vec<_>, _>>()?;
            (tgt, ActionMap::new(ms)?)
        }
    };
    let mut r = Report::new(format!("pushforward from {name}"));
    let as_countable = |g: &FiniteGame, n: &str| perfeq::perfection::CountableGame::from_finite(n, g);
    let respect = respects_payoffs(&as_countable(&src, "source"), &as_countable(&tgt, "target"), &phi)?;
    r.push(match &respect {
        Respect::Fails { player, point, gap } => Check::new("the map respects payoffs", false)
            .value("player", player + 1)
            .value("point", format!("{point:?}"))
            .value("gap", gap),
        _ => Check::new("the map respects payoffs", true).value("map", &phi),
    });
    if !respect.holds() {
        return Ok(r);
    }
    let allowed: Vec<MixedProfile> = if allowed.is_empty() {
        pure_profiles(&tgt)
            .into_iter()
            .filter(|p| perfect_decide_2p(&tgt, p).map(|v| v.is_perfect()).unwrap_or(false))
            .collect()
    } else {
        allowed.iter().map(|p| parse_profile(p, tgt.action_counts())).collect::<Result<_, _>>()?
    };
    let mut cands = pure_profiles(&src);
    cands.extend(in_file);
    r.absorb(pushforward_check(&src, &tgt, &phi, &cands, &allowed)?);
    Ok(r)
}

fn scenario(name: Option<&str>) -> Result<Report, Error> {
    match name {
        Some(n) => scenario_verify(n),
        None => {
            let mut r = Report::new("all scenarios");
            for n in scenario_names() {
                r.absorb(scenario_verify(n)?);
            }
            Ok(r)
        }
    }
}

fn selftest(cases: usize, seed: u64) -> Result<Report, Error> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new("selftest");
    let (mut nash_ok, mut reduce_ok, mut push_ok) = (true, true, true);
    for _ in 0..cases {
        let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let mut cell = || Rational::int(rng.gen_range(-2..=2));
        let u1: Vec<Vec<Rational>> = (0..m).map(|_| (0..n).map(|_| cell()).collect()).collect();
        let u2: Vec<Vec<Rational>> = (0..m).map(|_| (0..n).map(|_| cell()).collect()).collect();
        let g = FiniteGame::bimatrix(&u1, &u2)?;
        let (red, phi) = reduced_form(&g);
        reduce_ok &= reduced_form(&red).0 == red;
        for p in pure_profiles(&g) {
            if perfect_decide_2p(&g, &p)?.is_perfect() {
                nash_ok &= g.is_nash(&p)?;
                let img = phi.push_profile(&p, red.action_counts())?;
                push_ok &= perfect_decide_2p(&red, &img)?.is_perfect();
            }
        }
    }
    r.push(Check::new("perfect profiles are Nash", nash_ok).value("games", cases));
    r.push(Check::new("reduced forms are already reduced", reduce_ok).value("games", cases));
    r.push(Check::new("perfect profiles push forward to perfect profiles", push_ok).value("games", cases));
    for n in ["reduced_coordination", "admissible_dominated"] {
        r.absorb(scenario_verify(n)?);
    }
    Ok(r)
}

fn run(cli: &Cli) -> Result<Report, Error> {
    if !cli.tol.is_positive() {
        return Err(Error::invariant("tolerance must be positive"));
    }
    if cli.horizon == 0 {
        return Err(Error::invariant("horizon must be at least 1"));
    }
    match &cli.command {
        Command::Nash { game, profile } => nash(game, profile),
        Command::Perfect { game, profile } => perfect(game, profile, cli.seed),
        Command::Dominance { game, player, strategy } => dominance(game, *player, strategy),
        Command::Integrate { game, profile } => integrate(game, profile, &cli.tol),
        Command::Witness { file } => witness(file),
        Command::Pushforward { source, target, map, allowed } => pushforward(source, target.as_ref(), map, allowed),
        Command::Scenario { name } => scenario(name.as_deref()),
        Command::Selftest { cases } => selftest(*cases, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Text => print!("{report}"),
                Format::Json => println!("{}", report.to_json()),
            }
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            let op = cli.command.name();
            let code = err_code(&e);
            match cli.format {
                Format::Text => eprintln!("perfeq {op}: {e}"),
                Format::Json => {
                    let status = if code == 2 { Status::Inconclusive.to_string() } else { "error".into() };
                    let doc = serde_json::json!({
                        "report_version": REPORT_VERSION,
                        "operation": op,
                        "status": status,
                        "error": e.to_string(),
                    });
                    println!("{doc:#}");
                }
            }
            ExitCode::from(code)
        }
    }
}
