//! Game and witness files.
//!
//! Both are JSON documents. A finite game:
//!
//! ```text
//! {
//!   "players": 2,
//!   "actions": [["T", "M", "B"], ["L", "C", "R"]],
//!   "payoffs": [[["4", "0", "0"], ...], [[...], ...]],
//!   "profiles": ["(1/2,1/2,0);(1/2,1/2,0)"]
//! }
//! ```
//!
//! Tensors nest one level per player, indexed in player order; entries are
//! `"p/q"` strings. A countable game names a built-in family instead:
//! `{ "family": "variant_wald" }`.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;

use crate::charges::Charge;
use crate::error::{Error, Result};
use crate::finite::{FiniteGame, MixedProfile};
use crate::integration::ChargeProfile;
use crate::perfection::{CarrierSpec, CountableGame, TychonovNbhd};
use crate::rational::Rational;
use crate::sets::SetExpr;

/// A payoff tensor as written: a leaf or a list of sub-tensors.
#[derive(Debug)]
enum Nested {
    Leaf(Rational),
    List(Vec<Nested>),
}

impl<'de> Deserialize<'de> for Nested {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Nested;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a \"p/q\" string or an array")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Nested, E> {
                s.parse().map(Nested::Leaf).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> std::result::Result<Nested, E> {
                Ok(Nested::Leaf(Rational::from(x)))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> std::result::Result<Nested, E> {
                Ok(Nested::Leaf(Rational::from(x)))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Nested, A::Error> {
                let mut out = Vec::new();
                while let Some(x) = seq.next_element()? {
                    out.push(x);
                }
                Ok(Nested::List(out))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDoc {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    family: Option<String>,
    #[serde(default)]
    players: Option<usize>,
    #[serde(default)]
    actions: Option<Vec<Vec<String>>>,
    #[serde(default)]
    payoffs: Option<Vec<Nested>>,
    #[serde(default)]
    profiles: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum GameFile {
    Finite { name: String, game: FiniteGame, profiles: Vec<MixedProfile> },
    Countable(CountableGame),
}

impl GameFile {
    pub fn name(&self) -> &str {
        match self {
            GameFile::Finite { name, .. } => name,
            GameFile::Countable(g) => g.name(),
        }
    }

    pub fn countable(&self) -> CountableGame {
        match self {
            GameFile::Finite { name, game, .. } => CountableGame::from_finite(name.clone(), game),
            GameFile::Countable(g) => g.clone(),
        }
    }
}

/// Built-in countable games by name.
pub fn family(name: &str) -> Result<CountableGame> {
    Ok(match name {
        "variant_wald" => CountableGame::variant_wald(),
        "example_3_3" => CountableGame::example_3_3(),
        "hazy_filter_game" => CountableGame::hazy_filter_game(false),
        "hazy_filter_game_infinity" => CountableGame::hazy_filter_game(true),
        other => return Err(Error::NotApplicable(format!("no game family named `{other}`"))),
    })
}

fn json_error(context: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        context: context.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    }
}

fn flatten(t: Nested, shape: &[usize], out: &mut Vec<Rational>, path: &mut Vec<usize>) -> Result<()> {
    match (t, shape.split_first()) {
        (Nested::Leaf(x), None) => {
            out.push(x);
            Ok(())
        }
        (Nested::List(xs), Some((&n, rest))) if xs.len() == n => {
            for (i, x) in xs.into_iter().enumerate() {
                path.push(i + 1);
                flatten(x, rest, out, path)?;
                path.pop();
            }
            Ok(())
        }
        (Nested::List(xs), Some((&n, _))) => Err(Error::ShapeMismatch(format!(
            "payoff tensor at {path:?} has {} entries, expected {n}",
            xs.len()
        ))),
        (Nested::List(_), None) => Err(Error::ShapeMismatch(format!("payoff tensor nests too deep at {path:?}"))),
        (Nested::Leaf(_), Some(_)) => Err(Error::ShapeMismatch(format!("payoff tensor stops early at {path:?}"))),
    }
}

/// Parses and validates a game document.
pub fn parse_game(src: &str, context: &str) -> Result<GameFile> {
    if src.trim().is_empty() {
        return Err(Error::Parse {
            context: context.to_string(),
            line: 1,
            column: 1,
            message: "empty game file".into(),
        });
    }
    let doc: GameDoc = serde_json::from_str(src).map_err(|e| json_error(context, e))?;
    if let Some(f) = &doc.family {
        if doc.payoffs.is_some() || doc.actions.is_some() {
            return Err(Error::invariant("a family game takes no actions or payoffs"));
        }
        return family(f).map(GameFile::Countable);
    }
    let actions = doc.actions.ok_or_else(|| Error::invariant("missing field `actions`"))?;
    let payoffs = doc.payoffs.ok_or_else(|| Error::invariant("missing field `payoffs`"))?;
    let n = doc.players.unwrap_or(actions.len());
    if actions.len() != n || payoffs.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} players but {} action lists and {} payoff tensors",
            actions.len(),
            payoffs.len()
        )));
    }
    let counts: Vec<usize> = actions.iter().map(Vec::len).collect();
    let mut tensors = Vec::with_capacity(n);
    for (i, t) in payoffs.into_iter().enumerate() {
        let mut flat = Vec::new();
        flatten(t, &counts, &mut flat, &mut Vec::new())
            .map_err(|e| Error::ShapeMismatch(format!("player {}: {e}", i + 1)))?;
        tensors.push(flat);
    }
    let game = FiniteGame::new(counts.clone(), tensors)?.with_labels(actions)?;
    let profiles = doc
        .profiles
        .iter()
        .map(|p| parse_profile(p, &counts))
        .collect::<Result<Vec<_>>>()?;
    Ok(GameFile::Finite {
        name: doc.name.unwrap_or_else(|| context.to_string()),
        game,
        profiles,
    })
}

/// A profile literal checked against the action counts.
pub fn parse_profile(src: &str, counts: &[usize]) -> Result<MixedProfile> {
    let p: MixedProfile = src.parse()?;
    if p.shape() != counts {
        return Err(Error::ShapeMismatch(format!("profile {src} has shape {:?}, game has {counts:?}", p.shape())));
    }
    Ok(p)
}

/// A `;`-separated list of charge literals.
pub fn parse_charge_profile(src: &str) -> Result<ChargeProfile> {
    Ok(ChargeProfile::new(src.split(';').map(|s| s.trim().parse()).collect::<Result<Vec<Charge>>>()?))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_game(path: &Path) -> Result<GameFile> {
    parse_game(&read(path)?, &path.display().to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessDoc {
    game: String,
    sigma: Vec<String>,
    carriers: Vec<Vec<String>>,
    partitions: Vec<Vec<String>>,
    epsilon: Rational,
    tau: Vec<String>,
    kappa: Vec<String>,
    #[serde(default = "default_horizon")]
    horizon: u64,
    #[serde(default = "default_tol")]
    tol: Rational,
}

fn default_horizon() -> u64 {
    64
}

fn default_tol() -> Rational {
    Rational::new(1, 1_000_000)
}

/// Everything `verify_perfection_witness` takes.
#[derive(Clone, Debug)]
pub struct Witness {
    pub game: CountableGame,
    pub sigma: ChargeProfile,
    pub carriers: CarrierSpec,
    pub nbhd: TychonovNbhd,
    pub tau: ChargeProfile,
    pub kappa: ChargeProfile,
    pub horizon: u64,
    pub tol: Rational,
}

fn sets(xs: &[Vec<String>]) -> Result<Vec<Vec<SetExpr>>> {
    xs.iter().map(|row| row.iter().map(|s| s.parse()).collect()).collect()
}

fn charges(xs: &[String]) -> Result<ChargeProfile> {
    Ok(ChargeProfile::new(xs.iter().map(|s| s.parse()).collect::<Result<Vec<Charge>>>()?))
}

/// A witness document: `game` names a family, charges and sets use their
/// literal grammars.
pub fn parse_witness(src: &str, context: &str) -> Result<Witness> {
    let doc: WitnessDoc = serde_json::from_str(src).map_err(|e| json_error(context, e))?;
    let sigma = charges(&doc.sigma)?;
    Ok(Witness {
        game: family(&doc.game)?,
        nbhd: TychonovNbhd::new(sigma.clone(), sets(&doc.partitions)?, doc.epsilon)?,
        sigma,
        carriers: CarrierSpec::new(sets(&doc.carriers)?)?,
        tau: charges(&doc.tau)?,
        kappa: charges(&doc.kappa)?,
        horizon: doc.horizon,
        tol: doc.tol,
    })
}

pub fn read_witness(path: &Path) -> Result<Witness> {
    parse_witness(&read(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::tests::admissible_dominated;

    const ADMISSIBLE: &str = r#"{
  "players": 2,
  "actions": [["T", "M", "B"], ["L", "C", "R"]],
  "payoffs": [
    [["4", "0", "0"], ["0", "4", "0"], ["2", "2", "1"]],
    [["4", "0", "2"], ["0", "4", "2"], ["0", "0", "1"]]
  ],
  "profiles": ["(1/2,1/2,0);(1/2,1/2,0)"]
}"#;

    #[test]
    fn reads_finite_game() {
        match parse_game(ADMISSIBLE, "t").unwrap() {
            GameFile::Finite { game, profiles, .. } => {
                assert_eq!(game.payoff_tensor(0), admissible_dominated().payoff_tensor(0));
                assert_eq!(game.payoff_tensor(1), admissible_dominated().payoff_tensor(1));
                assert_eq!(game.labels(1)[2], "R");
                assert_eq!(profiles.len(), 1);
            }
            g => panic!("{g:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_game("", "t"), Err(Error::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_game("  \n", "t"), Err(Error::Parse { .. })));
        let bad = ADMISSIBLE.replace("\"2\", \"2\", \"1\"", "\"2\", \"x\", \"1\"");
        match parse_game(&bad, "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            r => panic!("{r:?}"),
        }
        let mass = ADMISSIBLE.replace("(1/2,1/2,0);", "(1/2,1/2,1/4);");
        assert!(matches!(parse_game(&mass, "t"), Err(Error::InvariantViolation(_))));
        let short = ADMISSIBLE.replace("[\"0\", \"0\", \"1\"]", "[\"0\", \"0\"]");
        assert!(matches!(parse_game(&short, "t"), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn families() {
        match parse_game(r#"{"family": "variant_wald"}"#, "t").unwrap() {
            GameFile::Countable(g) => assert_eq!(g.players(), 2),
            g => panic!("{g:?}"),
        }
        assert!(parse_game(r#"{"family": "nope"}"#, "t").is_err());
        assert_eq!(parse_charge_profile("diffuse; delta(3)").unwrap().len(), 2);
    }

    #[test]
    fn reads_witness() {
        let src = r#"{
  "game": "example_3_3",
  "sigma": ["delta(1)", "diffuse"],
  "carriers": [["{1}", "{2}"], ["{1}", "int(2,)"]],
  "partitions": [["{1}", "int(2,)"], ["{1}", "int(2,)"]],
  "epsilon": "1/10",
  "tau": ["19/20*delta(1) + 1/20*delta(2)", "1/20*geom(k0=1, r=1/2) + 19/20*diffuse"],
  "kappa": ["delta(1)", "diffuse"]
}"#;
        let w = parse_witness(src, "w").unwrap();
        assert_eq!(w.horizon, 64);
        assert_eq!(w.sigma.len(), 2);
    }
}
