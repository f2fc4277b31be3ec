//! Replays of the worked examples as reports of exact sub-claims.

use crate::charges::{Charge, UltrafilterBase};
use crate::error::{Error, Result};
use crate::finite::{perfect_decide_2p, FiniteGame, MixedProfile, Perfection2p, Refutation};
use crate::integration::{pure_action_payoff, ChargeProfile, PayoffSpec, VariantWald};
use crate::rational::{fmt_vector, Rational};
use crate::report::{Check, Report};
use crate::sets::SetExpr;

use super::{
    best_response, br_region, br_threshold, countable_nash, hazy_filter_test, hazy_payoff, nbhd_contains, twins_test,
    verify_perfection_witness, wald_mixer, BrOutcome, CarrierSpec, CountableGame, Haziness, TychonovNbhd, Twinship,
};

const NAMES: [&str; 5] = [
    "example_3_3",
    "variant_wald",
    "hazy_filter_game",
    "reduced_coordination",
    "admissible_dominated",
];

pub fn scenario_names() -> &'static [&'static str] {
    &NAMES
}

pub fn scenario_verify(name: &str) -> Result<Report> {
    match name {
        "example_3_3" => example_3_3(),
        "variant_wald" => variant_wald(),
        "hazy_filter_game" => hazy_filter_game(),
        "reduced_coordination" => reduced_coordination(),
        "admissible_dominated" => admissible_dominated(),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}

fn tol() -> Rational {
    Rational::new(1, 1_000_000)
}

fn set(s: &str) -> SetExpr {
    s.parse().expect("scenario set literal")
}

fn charge(s: &str) -> Charge {
    s.parse().expect("scenario charge literal")
}

fn sets(list: &[&str]) -> Vec<SetExpr> {
    list.iter().map(|s| set(s)).collect()
}

fn all_best(outcomes: &[BrOutcome]) -> bool {
    outcomes.iter().all(BrOutcome::is_best_response)
}

/// Some player has a strictly better pure action; players whose comparison
/// stays open do not count either way.
fn refuted(game: &CountableGame, prof: &ChargeProfile, horizon: u64, tol: &Rational) -> Result<bool> {
    for i in 0..game.players() {
        match best_response(game, i, prof.get(i), prof, horizon, tol) {
            Ok(BrOutcome::Beaten { .. }) => return Ok(true),
            Ok(_) | Err(Error::Inconclusive { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

fn example_3_3() -> Result<Report> {
    let game = CountableGame::example_3_3();
    let t = tol();
    let mut r = Report::new("example_3_3");
    let u1 = game.payoff(0);

    let mut ok = true;
    for n in 1..=100u64 {
        let p = ChargeProfile::new(vec![Charge::dirac(1), Charge::dirac(n)]);
        let top = pure_action_payoff(u1, 0, 1, &p, &t)?;
        let bottom = pure_action_payoff(u1, 0, 2, &p, &t)?;
        let inv = Rational::from(n).recip();
        ok &= top.is_exact() && bottom.is_exact() && top.lower == inv && bottom.lower == -inv;
    }
    r.push(Check::new("T earns 1/n and B earns -1/n against delta(n), n <= 100", ok).value("gap_at_100", Rational::new(1, 50)));

    let horizon = 64;
    let mut boundary = true;
    for j in 0..=20 {
        let p = Rational::new(j, 20);
        let k1 = Charge::from_mixed(&[p.clone(), Rational::one() - &p])?;
        let prof = ChargeProfile::new(vec![k1, charge("diffuse")]);
        let nash = all_best(&countable_nash(&game, &prof, horizon, &t)?);
        boundary &= nash == (p >= Rational::new(1, 2));
    }
    r.push(
        Check::new("with diffuse kappa_2, (p, 1-p) is Nash exactly when p >= 1/2", boundary)
            .value("grid", "p = j/20")
            .value("horizon", horizon),
    );

    let mut none = true;
    let opponents = ["delta(1)", "delta(7)", "geom(k0=1, r=1/2)", "1/2*delta(3) + 1/2*diffuse", "1/10*geom(k0=2, r=3/4) + 9/10*diffuse"];
    for k2 in opponents {
        for k1 in [Charge::dirac(1), Charge::dirac(2), Charge::from_mixed(&[Rational::new(1, 2), Rational::new(1, 2)])?] {
            let prof = ChargeProfile::new(vec![k1, charge(k2)]);
            none &= refuted(&game, &prof, horizon, &t)?;
        }
    }
    r.push(Check::new("no Nash equilibrium where kappa_2 has an atom (sampled)", none).value("opponents", opponents.len()));

    // Against any tremble with tau_2({1}) > 0, T beats B by at least 2 tau_2({1}),
    // while every kappa_1 within (1-p)/2 of (p, 1-p) keeps mass on B.
    let trembles = ["1/10*delta(1) + 9/10*diffuse", "1/10*geom(k0=1, r=1/2) + 9/10*diffuse", "1/1000*geom(k0=1, r=1/2) + 999/1000*diffuse"];
    let mut strict = true;
    let mut least = None::<Rational>;
    for tau2 in trembles {
        let prof = ChargeProfile::new(vec![Charge::dirac(1), charge(tau2)]);
        let top = pure_action_payoff(u1, 0, 1, &prof, &t)?;
        let bottom = pure_action_payoff(u1, 0, 2, &prof, &t)?;
        strict &= bottom.upper < top.lower;
        let gap = &top.lower - &bottom.upper;
        least = Some(least.map_or(gap.clone(), |l| l.min(gap)));
    }
    r.push(
        Check::new("T strictly beats B against sampled trembles", strict).value("least_gap", least.expect("trembles")),
    );
    let cells = sets(&["{1}", "{2}", "int(3,)"]);
    let mut excluded = true;
    for j in 0..20 {
        let p = Rational::new(j, 20);
        let k1 = Charge::from_mixed(&[p.clone(), Rational::one() - &p])?;
        let sigma = ChargeProfile::new(vec![k1, charge("diffuse")]);
        let eps = (Rational::one() - &p) / Rational::int(2);
        let nbhd = TychonovNbhd::new(sigma.clone(), vec![cells.clone(), cells.clone()], eps)?;
        excluded &= !nbhd_contains(&nbhd, &sigma.with(0, Charge::dirac(1)))?;
    }
    r.push(Check::new("for p < 1 the radius (1-p)/2 excludes every best response delta(T)", excluded).value("grid", "p = j/20"));

    let sigma = ChargeProfile::new(vec![Charge::dirac(1), charge("diffuse")]);
    let nbhd = TychonovNbhd::new(sigma.clone(), vec![cells.clone(), cells], Rational::new(1, 10))?;
    let spec = CarrierSpec::new(vec![sets(&["{1}", "{2}"]), sets(&["{1}", "{2,3}", "int(5,)"])])?;
    let eta = Rational::new(1, 20);
    let tau = ChargeProfile::new(vec![
        Charge::from_mixed(&[Rational::one() - &eta, eta])?,
        charge("1/20*geom(k0=1, r=1/2) + 19/20*diffuse"),
    ]);
    r.absorb(verify_perfection_witness(&game, &sigma, &spec, &nbhd, &tau, &sigma, horizon, &t)?);
    Ok(r)
}

/// Cells of positive mass as `(K_s, q_s)` with `K_s` the least element of the cell above 1.
fn wald_targets(mu: &Charge, cells: &[SetExpr]) -> Result<Vec<(u64, Rational)>> {
    let mut out = Vec::new();
    for c in cells {
        let q = mu.eval(c)?;
        if q.is_positive() {
            let k = c.difference(&SetExpr::singleton(1)).nf().min_element().expect("positive cells are infinite");
            out.push((k, q));
        }
    }
    out.sort_by_key(|(k, _)| *k);
    Ok(out)
}

/// The perfection witness for a pair of diffuse charges: `κ_j` spreads the
/// cell masses of `μ_j` over points `K_s`, and `τ_i` mixes a little of a
/// full-support charge whose pure best responses are exactly those points.
fn wald_witness(
    mu: &ChargeProfile,
    partitions: &[Vec<SetExpr>],
    epsilon: &Rational,
) -> Result<(ChargeProfile, ChargeProfile, u64)> {
    let eta = epsilon / Rational::int(2);
    let mut tau = vec![None, None];
    let mut kappa = vec![None, None];
    let mut horizon = 1u64;
    for j in 0..2 {
        let targets = wald_targets(mu.get(j), &partitions[j])?;
        let ks: Vec<u64> = targets.iter().map(|(k, _)| *k).collect();
        let mixer = wald_mixer(&ks)?;
        let below: Rational = (1..ks[0]).map(|k| mixer.point_mass(k)).sum();
        let best = below / Rational::from(ks[0]);
        let steps = (Rational::one() / &best).ceil_u64() + 1;
        horizon = horizon.max(steps);
        kappa[j] = Some(Charge::from_atoms(targets)?);
        let i = 1 - j;
        let t = mixer.scaled(&eta).plus(&mu.get(i).scaled(&(Rational::one() - &eta)));
        tau[i] = Some(Charge::new(t)?);
    }
    let unwrap = |v: Vec<Option<Charge>>| ChargeProfile::new(v.into_iter().map(|c| c.expect("both players")).collect());
    Ok((unwrap(tau), unwrap(kappa), horizon))
}

struct WaldCase {
    mu: [&'static str; 2],
    partitions: [&'static [&'static str]; 2],
    epsilon: (i64, i64),
    carriers: [&'static [&'static str]; 2],
}

const WALD_CASES: [WaldCase; 3] = [
    WaldCase {
        mu: ["diffuse", "diffuse"],
        partitions: [&["int(1,3)", "int(4,)"], &["{1}", "int(2,9)", "int(10,)"]],
        epsilon: (1, 10),
        carriers: [&["{1}", "{2}"], &["{7}", "int(20,)"]],
    },
    WaldCase {
        mu: ["uf{evens}", "1/2*uf{ap(0,3)} + 1/2*uf{ap(1,3)}"],
        partitions: [&["evens", "odds"], &["ap(0,3)", "ap(1,3)", "ap(2,3)"]],
        epsilon: (1, 20),
        carriers: [&["odds", "{1}"], &["ap(2,3)"]],
    },
    WaldCase {
        mu: ["1/3*uf{ap(0,5)} + 2/3*uf{ap(2,5)}", "1/4*uf{evens} + 3/4*uf{odds}"],
        partitions: [&["ap(0,5)", "ap(2,5)", "!(ap(0,5) | ap(2,5))"], &["int(1,5)", "evens & int(6,)", "odds & int(6,)"]],
        epsilon: (1, 7),
        carriers: [&["ap(1,5)", "{3}"], &["int(1,5)", "{100}"]],
    },
];

fn variant_wald() -> Result<Report> {
    let game = CountableGame::variant_wald();
    let t = tol();
    let mut r = Report::new("variant_wald");

    let limits = [0, 1].iter().all(|&p| PayoffSpec::uniform_limit(std::sync::Arc::new(VariantWald::new(p))).is_ok());
    r.push(Check::new("claim 1: payoffs are uniform limits of simple functions", limits));

    // The player whose atom is lower moves it just above the other's.
    let mut beaten = 0u32;
    let mut first_failure = None;
    for a in 1..=100u64 {
        for b in 1..=100u64 {
            let prof = ChargeProfile::new(vec![Charge::dirac(a), Charge::dirac(b)]);
            let (mover, to) = if a <= b { (0, b + 1) } else { (1, a + 1) };
            let value = game.expected_payoff(mover, &prof, &t)?;
            let dev = pure_action_payoff(game.payoff(mover), mover, to, &prof, &t)?;
            if value.upper < dev.lower {
                beaten += 1;
            } else if first_failure.is_none() {
                first_failure = Some((a, b));
            }
        }
    }
    let mut c2 = Check::new("claim 2: no atom pair (a, b) with a, b <= 100 is Nash", beaten == 10_000).value("refuted", beaten);
    if let Some((a, b)) = first_failure {
        c2 = c2.note(format!("no profitable deviation found at ({a}, {b})"));
    }
    r.push(c2);

    let pairs = [
        ("diffuse", "diffuse"),
        ("uf{evens}", "1/2*uf{odds} + 1/2*diffuse"),
        ("1/3*uf{ap(0,3)} + 2/3*uf{ap(1,3)}", "uf{ap(2,7)}"),
    ];
    let bound = Rational::new(1, 1_000_000);
    for (x, y) in pairs {
        let prof = ChargeProfile::new(vec![charge(x), charge(y)]);
        let v0 = game.expected_payoff(0, &prof, &t)?;
        let v1 = game.expected_payoff(1, &prof, &t)?;
        let near = [&v0, &v1].iter().all(|v| v.lower >= -bound.clone() && v.upper <= bound);
        let nash = all_best(&countable_nash(&game, &prof, 16, &t)?);
        r.push(
            Check::new(format!("claim 3: ({x}, {y}) is Nash with payoff 0"), near && nash)
                .value("payoff_1", v0)
                .value("payoff_2", v1),
        );
    }
    let prof = ChargeProfile::new(vec![charge("diffuse"), charge("1/2*delta(3) + 1/2*diffuse")]);
    r.push(Check::new(
        "claim 3: a diffuse charge against one with an atom is not Nash",
        refuted(&game, &prof, 16, &t)?,
    ));

    for (n, case) in WALD_CASES.iter().enumerate() {
        let mu = ChargeProfile::new(case.mu.iter().map(|s| charge(s)).collect());
        let partitions: Vec<Vec<SetExpr>> = case.partitions.iter().map(|p| sets(p)).collect();
        let eps = Rational::new(case.epsilon.0, case.epsilon.1);
        let nbhd = TychonovNbhd::new(mu.clone(), partitions.clone(), eps.clone())?;
        let spec = CarrierSpec::new(case.carriers.iter().map(|c| sets(c)).collect())?;
        let (tau, kappa, horizon) = wald_witness(&mu, &partitions, &eps)?;
        let mut sub = verify_perfection_witness(&game, &mu, &spec, &nbhd, &tau, &kappa, horizon, &t)?;
        sub.subject = format!("claim 4, carrier {} ({spec})", n + 1);
        r.absorb(sub);
    }
    Ok(r)
}

/// Finds a window `{k, k+1}` with `k ≥ from` whose points lie in the cells
/// forced by the two bases.
fn hazy_window(a: &SetExpr, b: &SetExpr, from: u64) -> Option<(u64, u64)> {
    let horizon = from + 4 * (a.nf().threshold() + a.nf().period() + b.nf().threshold() + b.nf().period()) + 4;
    (from..horizon).find_map(|k| {
        if a.contains(k) && b.contains(k + 1) {
            Some((k, k + 1))
        } else if b.contains(k) && a.contains(k + 1) {
            Some((k + 1, k))
        } else {
            None
        }
    })
}

fn cell_of<'a>(base: &UltrafilterBase, cells: &'a [SetExpr]) -> Result<&'a SetExpr> {
    for c in cells {
        if base.decide_or_err(c)? {
            return Ok(c);
        }
    }
    Err(Error::invariant("no cell is forced by the base"))
}

/// Witness for `(δ(D), κ₂)` with `κ₂` a twinned hazy filter.
fn hazy_witness(
    game: &CountableGame,
    kappa2: &Charge,
    cells2: &[SetExpr],
    epsilon: &Rational,
    carrier2: &[SetExpr],
) -> Result<Report> {
    let comps = kappa2.diffuse();
    if comps.len() != 2 {
        return Err(Error::invariant("expected two ultrafilter components"));
    }
    let (w, first, second) = (&comps[0].weight, &comps[0].base, &comps[1].base);
    let (fs, ft) = (cell_of(first, cells2)?, cell_of(second, cells2)?);
    let mut k0 = 2;
    while br_threshold(k0) >= *epsilon {
        k0 += 1;
    }
    let (a, b) = hazy_window(fs, ft, k0).ok_or_else(|| Error::invariant("forced cells share no window"))?;
    let k = a.min(b);
    let p = br_threshold(k);
    let rho = Charge::from_atoms([(a, w.clone()), (b, Rational::one() - w)])?;
    let theta = epsilon / Rational::int(2);
    let tau2 = Charge::new(kappa2.scaled(&(Rational::one() - &theta)).plus(&Charge::geometric(1, Rational::new(1, 2)).scaled(&theta)))?;
    let tau1 = Charge::from_mixed(&[p.clone(), Rational::one() - &p])?;
    let horizon = (&p / hazy_payoff(&p, k)).ceil_u64() + 1;

    let sigma = ChargeProfile::new(vec![Charge::dirac(2), kappa2.clone()]);
    let cells1 = sets(&["{1}", "{2}", "int(3,)"]);
    let nbhd = TychonovNbhd::new(sigma.clone(), vec![cells1, cells2.to_vec()], epsilon.clone())?;
    let spec = CarrierSpec::new(vec![sets(&["{1}", "{2}"]), carrier2.to_vec()])?;
    let tau = ChargeProfile::new(vec![tau1, tau2]);
    let kappa = ChargeProfile::new(vec![Charge::dirac(2), rho]);
    let mut sub = verify_perfection_witness(game, &sigma, &spec, &nbhd, &tau, &kappa, horizon, &tol())?;
    sub.checks.insert(
        0,
        Check::new("window found", true).value("k", k).value("a", a).value("b", b).value("p_k", p),
    );
    Ok(sub)
}

fn hazy_filter_game() -> Result<Report> {
    let mut r = Report::new("hazy_filter_game");
    let decreasing = (2..500).all(|k| br_threshold(k) > br_threshold(k + 1));
    r.push(Check::new("p_k strictly decreasing for k <= 500", decreasing).value("p_2", br_threshold(2)).value("p_500", br_threshold(500)));

    let mut ties = true;
    for k in 2..=100 {
        let p = br_threshold(k);
        ties &= br_region(&p)? == vec![k, k + 1] && hazy_payoff(&p, k) == hazy_payoff(&p, k + 1);
    }
    r.push(
        Check::new("best responses at p_k are exactly {k, k+1}, k <= 100", ties)
            .value("tie_at_p_2", hazy_payoff(&br_threshold(2), 2)),
    );

    let game = CountableGame::hazy_filter_game(false);
    let t = tol();
    let mut encoded = true;
    for k in 2..=12u64 {
        let p = br_threshold(k);
        let prof = ChargeProfile::new(vec![Charge::from_mixed(&[p.clone(), Rational::one() - &p])?, Charge::dirac(1)]);
        for a in [k, k + 1, k + 2] {
            let v = pure_action_payoff(game.payoff(1), 1, a, &prof, &t)?;
            encoded &= v.is_exact() && v.lower == hazy_payoff(&p, a);
        }
    }
    r.push(Check::new("integrated payoffs match the closed form at p_k, k <= 12", encoded));

    let twinned = charge("1/2*uf{evens} + 1/2*uf{odds}");
    let d = twinned.diffuse();
    r.push(Check::new("1/2 uf(evens) + 1/2 uf(odds) is hazy", matches!(hazy_filter_test(&twinned)?, Haziness::Hazy)));
    r.push(Check::new("its ultrafilters are twins", matches!(twins_test(&d[0].base, &d[1].base), Twinship::Twins)));

    let cases: [(&str, &[&str], (i64, i64), &[&str]); 4] = [
        ("1/2*uf{evens} + 1/2*uf{odds}", &["evens", "odds"], (1, 10), &["{1}", "evens"]),
        ("1/2*uf{evens} + 1/2*uf{odds}", &["int(1,20)", "evens & int(21,)", "odds & int(21,)"], (1, 50), &["{3}", "int(1,20)"]),
        ("1/2*uf{evens} + 1/2*uf{odds}", &["nat"], (1, 100), &["{1}"]),
        ("1/3*uf{ap(0,3)} + 2/3*uf{ap(1,3)}", &["ap(0,3)", "ap(1,3)", "ap(2,3)"], (1, 30), &["ap(2,3)", "{2}"]),
    ];
    for (n, (k2, cells, eps, carrier)) in cases.iter().enumerate() {
        let mut sub = hazy_witness(&game, &charge(k2), &sets(cells), &Rational::new(eps.0, eps.1), &sets(carrier))?;
        sub.subject = format!("step 3 witness {} (kappa_2 = {k2})", n + 1);
        r.absorb(sub);
    }
    r.note("the witness is checked in sampled neighbourhoods only, not in every neighbourhood");
    Ok(r)
}

fn finite_report(subject: &str, game: &FiniteGame, profiles: &[(&str, bool)]) -> Result<Report> {
    let mut r = Report::new(subject);
    for (src, perfect) in profiles {
        let prof: MixedProfile = src.parse()?;
        let nash = game.is_nash(&prof)?;
        r.push(Check::new(format!("{src} is Nash"), nash));
        let verdict = perfect_decide_2p(game, &prof)?;
        let mut c = Check::new(
            format!("{src} is {}perfect", if *perfect { "" } else { "not " }),
            verdict.is_perfect() == *perfect,
        );
        if let Perfection2p::NotPerfect(Refutation::Dominated { player, by }) = &verdict {
            c = c.value("dominated_player", player + 1).value("by", fmt_vector(by));
        }
        r.push(c);
    }
    Ok(r)
}

fn reduced_coordination() -> Result<Report> {
    let g = FiniteGame::bimatrix(
        &[vec![Rational::zero(), Rational::zero()], vec![Rational::zero(), Rational::one()]],
        &[vec![Rational::zero(), Rational::zero()], vec![Rational::zero(), Rational::one()]],
    )?;
    finite_report("reduced_coordination", &g, &[("(0,1);(0,1)", true), ("(1,0);(1,0)", false)])
}

fn admissible_dominated() -> Result<Report> {
    let m = |rows: [[i64; 3]; 3]| -> Vec<Vec<Rational>> { rows.iter().map(|r| r.iter().map(|&x| Rational::int(x)).collect()).collect() };
    let g = FiniteGame::bimatrix(&m([[4, 0, 0], [0, 4, 0], [2, 2, 1]]), &m([[4, 0, 2], [0, 4, 2], [0, 0, 1]]))?;
    finite_report(
        "admissible_dominated",
        &g,
        &[("(1/2,1/2,0);(1/2,1/2,0)", false), ("(0,0,1);(0,0,1)", true)],
    )
}
