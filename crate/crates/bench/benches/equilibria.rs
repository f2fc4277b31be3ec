use criterion::{black_box, criterion_group, criterion_main, Criterion};

use perfeq::charges::Charge;
use perfeq::finite::{perfect_decide_2p, FiniteGame, MixedProfile};
use perfeq::integration::{integrate_bracket, ChargeProfile};
use perfeq::invariance::reduced_form;
use perfeq::perfection::{br_region, br_threshold, scenario_verify, wald_mixer, CountableGame};
use perfeq::Rational;

fn admissible() -> FiniteGame {
    let m = |rows: [[i64; 3]; 3]| rows.iter().map(|r| r.iter().map(|&x| Rational::int(x)).collect()).collect::<Vec<Vec<_>>>();
    FiniteGame::bimatrix(&m([[4, 0, 0], [0, 4, 0], [2, 2, 1]]), &m([[4, 0, 2], [0, 4, 2], [0, 0, 1]])).unwrap()
}

fn finite(c: &mut Criterion) {
    let g = admissible();
    let p: MixedProfile = "(1/2,1/2,0);(1/2,1/2,0)".parse().unwrap();
    c.bench_function("perfect_decide_2p 3x3", |b| b.iter(|| perfect_decide_2p(black_box(&g), black_box(&p)).unwrap()));
    c.bench_function("reduced_form 3x3", |b| b.iter(|| reduced_form(black_box(&g))));
}

fn countable(c: &mut Criterion) {
    let wald = CountableGame::variant_wald();
    let tol = Rational::new(1, 1_000_000);
    let dd = ChargeProfile::new(vec!["diffuse".parse().unwrap(), "diffuse".parse().unwrap()]);
    c.bench_function("integrate variant_wald diffuse pair", |b| b.iter(|| integrate_bracket(&dd, wald.payoff(0), &tol).unwrap()));
    let mixed = ChargeProfile::new(vec![Charge::geometric(1, Rational::new(1, 2)), Charge::dirac(5)]);
    c.bench_function("integrate variant_wald geometric vs atom", |b| b.iter(|| integrate_bracket(&mixed, wald.payoff(1), &tol).unwrap()));
    c.bench_function("wald_mixer 5 targets", |b| b.iter(|| wald_mixer(black_box(&[3, 7, 12, 30, 50])).unwrap()));
    let p = br_threshold(40);
    c.bench_function("br_region at p_40", |b| b.iter(|| br_region(black_box(&p)).unwrap()));
}

fn scenarios(c: &mut Criterion) {
    let mut g = c.benchmark_group("scenarios");
    g.sample_size(10);
    g.bench_function("example_3_3", |b| b.iter(|| scenario_verify("example_3_3").unwrap()));
    g.finish();
}

criterion_group!(benches, finite, countable, scenarios);
criterion_main!(benches);
