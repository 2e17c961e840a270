//! Command-line front end. Words are typed with lowercase letters for
//! generators and uppercase for inverses (a = 1, b = 2, ..., optionally
//! followed by an explicit index for ranks past 26); "1" or the empty
//! string is the identity. Paths accept "-" for stdin. Exit codes: 0 on
//! success, 1 on a domain error (with a JSON error object), 2 on usage
//! errors.

use std::io::Read;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::json;

use crate::decision::{
    member_bounded, subgroup_conjugacy, MemberDecision, PreimageSubgroup, ProductGroup,
};
use crate::error::GroupError;
use crate::fibre::{classify_two_factor, generators, sb_family, Classification, FibreSpec};
use crate::hnn::{h1_transition, BSAtom, BSFibre, BSGroup};
use crate::homology::{h1_oracle, h2_finite, predicted_h1};
use crate::intlin::{cokernel, AbelianGroup, IntMatrix};
use crate::nilpotent::in_gamma;
use crate::presentations::FiniteGroup;
use crate::stallings::SubgroupGraph;
use crate::words::{free_conjugacy, primitive_root, Alphabet, Word};

#[derive(Parser)]
#[command(name = "subdirect", version, about = "Exact computations with subdirect products of free groups", disable_help_subcommand = true)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-group word operations.
    Word {
        #[command(subcommand)]
        op: WordOp,
    },
    /// Folded subgroup graphs of free groups.
    Stallings {
        #[command(subcommand)]
        op: StallingsOp,
    },
    /// Invariant factors of an integer matrix read as a relation matrix.
    Snf {
        /// Path to a whitespace-separated matrix: "rows cols" then entries.
        path: String,
    },
    /// Canonicalize an abelian group given as {"rank":r,"torsion":[..]}.
    Abgroup {
        /// Inline JSON or a path.
        input: String,
    },
    /// Integral H2 of a small finite group.
    H2finite {
        /// Group expression: trivial, cN, s3, dN, joined by x (e.g. c2xc2).
        group: String,
    },
    /// Fibre-product operations on a spec file.
    Fibre {
        #[command(subcommand)]
        op: FibreOp,
    },
    /// The exponent-sum kernel family on n rank-2 factors.
    Sb {
        n: usize,
        /// Optional tuple to test for membership (words joined by commas).
        tuple: Option<String>,
    },
    /// Lower-central-series membership of a free-group word.
    Gamma {
        #[arg(long)]
        rank: u32,
        #[arg(long)]
        class: usize,
        word: String,
    },
    /// Conjugacy inside a preimage subgroup; instance from a JSON file.
    Conj {
        path: String,
    },
    /// Membership in a preimage subgroup or a generated subgroup.
    Member {
        path: String,
    },
    /// Baumslag-Solitar operations.
    Bs {
        #[command(subcommand)]
        op: BsOp,
    },
}

#[derive(Subcommand)]
enum WordOp {
    /// Reduce a word to its canonical form.
    Reduce { word: String },
    /// Conjugacy in the free group, with a witness.
    Conj { u: String, v: String },
    /// Primitive root and exponent.
    Root { word: String },
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    rank: u32,
    /// Subgroup generators, words joined by commas.
    #[arg(long)]
    gens: String,
}

#[derive(Subcommand)]
enum StallingsOp {
    /// Fold and print the core graph.
    Fold {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Subgroup membership.
    Member {
        #[command(flatten)]
        graph: GraphArgs,
        word: String,
    },
    /// Index in the ambient free group, if finite.
    Index {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Free basis of the subgroup.
    Basis {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Normality in the ambient free group.
    Normal {
        #[command(flatten)]
        graph: GraphArgs,
    },
}

#[derive(Subcommand)]
enum FibreOp {
    Member { path: String, tuple: String },
    Generators { path: String },
    Classify { path: String },
    PredictH1 { path: String },
    OracleH1 { path: String },
}

#[derive(Subcommand)]
enum BsOp {
    /// Britton-reduce a word over t/T/b/B with optional exponent digits.
    Reduce {
        #[arg(long, default_value_t = 2)]
        m: i64,
        #[arg(long, default_value_t = 3)]
        n: i64,
        word: String,
    },
    /// H1 transition multipliers of the kernel window (lo, hi).
    H1window {
        #[arg(long, default_value_t = 2)]
        m: i64,
        #[arg(long, default_value_t = 3)]
        n: i64,
        lo: i64,
        hi: i64,
    },
    /// Membership of a pair in the untwisted fibre product.
    Fibre {
        #[arg(long, default_value_t = 2)]
        m: i64,
        #[arg(long, default_value_t = 3)]
        n: i64,
        left: String,
        right: String,
    },
}

/// Parse a word: lowercase = generator, uppercase = inverse, optional
/// decimal index after the letter; "1" or "" is the identity.
pub fn parse_word(s: &str) -> Result<Word, GroupError> {
    let mut letters = Vec::new();
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    if chars == ['1'] || chars.is_empty() {
        return Ok(Word::identity());
    }
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !c.is_ascii_alphabetic() {
            return Err(GroupError::Invalid(format!("unexpected character {c:?}")));
        }
        let base = (c.to_ascii_lowercase() as u32) - ('a' as u32) + 1;
        let mut digits = String::new();
        while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
            digits.push(chars[i + 1]);
            i += 1;
        }
        let idx = if digits.is_empty() {
            base
        } else {
            let explicit: u32 = digits
                .parse()
                .map_err(|_| GroupError::Invalid(format!("bad index {digits:?}")))?;
            if explicit == 0 || (explicit - 1) % 26 != base - 1 {
                return Err(GroupError::Invalid(format!(
                    "index {explicit} does not match letter {c:?}"
                )));
            }
            explicit
        };
        let signed = idx as i32;
        letters.push(if c.is_ascii_lowercase() { signed } else { -signed });
        i += 1;
    }
    Ok(Word::reduce(&letters))
}

pub fn parse_tuple(s: &str) -> Result<Vec<Word>, GroupError> {
    s.split(',').map(parse_word).collect()
}

fn parse_bs_word(s: &str) -> Result<Vec<BSAtom>, GroupError> {
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut atoms = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut digits = String::new();
        while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
            digits.push(chars[i + 1]);
            i += 1;
        }
        let count: i64 = if digits.is_empty() {
            1
        } else {
            digits
                .parse()
                .map_err(|_| GroupError::Invalid(format!("bad exponent {digits:?}")))?
        };
        let atom = match c {
            't' => BSAtom::T(count),
            'T' => BSAtom::T(-count),
            'b' => BSAtom::B(count),
            'B' => BSAtom::B(-count),
            other => {
                return Err(GroupError::Invalid(format!(
                    "unexpected character {other:?} in BS word"
                )))
            }
        };
        atoms.push(atom);
        i += 1;
    }
    Ok(atoms)
}

fn read_input(path: &str) -> Result<String, GroupError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| GroupError::Invalid(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| GroupError::Invalid(format!("{path}: {e}")))
    }
}

/// Inline JSON (starts with '{') or a path.
fn read_json_or_path(input: &str) -> Result<String, GroupError> {
    if input.trim_start().starts_with('{') {
        Ok(input.to_string())
    } else {
        read_input(input)
    }
}

/// Group expressions for h2finite: factors joined by 'x'.
fn parse_finite_group(s: &str) -> Result<FiniteGroup, GroupError> {
    let mut acc: Option<FiniteGroup> = None;
    for part in s.split('x') {
        let part = part.trim();
        let g = if part == "trivial" {
            FiniteGroup::trivial()
        } else if part == "s3" {
            FiniteGroup::symmetric3()
        } else if let Some(num) = part.strip_prefix('c') {
            let n: usize = num
                .parse()
                .map_err(|_| GroupError::Invalid(format!("bad cyclic order {num:?}")))?;
            FiniteGroup::cyclic(n)
        } else if let Some(num) = part.strip_prefix('d') {
            let n: usize = num
                .parse()
                .map_err(|_| GroupError::Invalid(format!("bad dihedral index {num:?}")))?;
            FiniteGroup::dihedral(n)
        } else {
            return Err(GroupError::Invalid(format!("unknown group {part:?}")));
        };
        acc = Some(match acc {
            None => g,
            Some(prev) => FiniteGroup::product(&prev, &g),
        });
    }
    acc.ok_or_else(|| GroupError::Invalid("empty group expression".into()))
}

fn load_spec(path: &str) -> Result<FibreSpec, GroupError> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| GroupError::Invalid(format!("spec: {e}")))
}

fn words_json(ws: &[Word]) -> serde_json::Value {
    json!(ws.iter().map(|w| w.to_string()).collect::<Vec<_>>())
}

/// Instance layout shared by `conj` and `member`:
/// factors, target {rank, torsion}, maps (per factor, per letter, vector),
/// s_gens; then x/y for conj, element (+ optional bounded search block)
/// for member.
#[derive(serde::Deserialize)]
struct InstanceFile {
    factors: Vec<u32>,
    target: AbelianGroup,
    maps: Vec<Vec<Vec<i64>>>,
    #[serde(default)]
    s_gens: Vec<Vec<i64>>,
    #[serde(default)]
    x: Option<Vec<String>>,
    #[serde(default)]
    y: Option<Vec<String>>,
    #[serde(default)]
    element: Option<Vec<String>>,
    #[serde(default)]
    bounded: Option<BoundedBlock>,
}

#[derive(serde::Deserialize)]
struct BoundedBlock {
    generators: Vec<Vec<String>>,
    length_bound: usize,
    order_bound: usize,
}

impl InstanceFile {
    fn subgroup(&self) -> Result<PreimageSubgroup, GroupError> {
        let product = ProductGroup::new(
            self.factors.iter().map(|&r| Alphabet::new(r)).collect(),
        )?;
        PreimageSubgroup::new(
            product,
            self.target.clone(),
            self.maps.clone(),
            self.s_gens
                .iter()
                .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    fn tuple(names: &[String]) -> Result<Vec<Word>, GroupError> {
        names.iter().map(|s| parse_word(s)).collect()
    }
}

fn run_command(cmd: Command) -> Result<String, GroupError> {
    match cmd {
        Command::Word { op } => match op {
            WordOp::Reduce { word } => Ok(parse_word(&word)?.to_string()),
            WordOp::Conj { u, v } => {
                let (u, v) = (parse_word(&u)?, parse_word(&v)?);
                Ok(match free_conjugacy(&u, &v) {
                    Some(g) => json!({"conjugate": true, "witness": g.to_string()}),
                    None => json!({"conjugate": false}),
                }
                .to_string())
            }
            WordOp::Root { word } => {
                let (root, exp) = primitive_root(&parse_word(&word)?)?;
                Ok(json!({"root": root.to_string(), "exponent": exp}).to_string())
            }
        },
        Command::Stallings { op } => {
            let fold = |g: &GraphArgs| -> Result<SubgroupGraph, GroupError> {
                SubgroupGraph::fold_from_generators(
                    Alphabet::new(g.rank),
                    &parse_tuple(&g.gens)?,
                )
            };
            match op {
                StallingsOp::Fold { graph } => {
                    let g = fold(&graph)?;
                    Ok(json!({
                        "vertices": g.vertex_count(),
                        "edges": g.edges(),
                        "finite_index": g.index_and_cosets().map(|t| t.len()),
                    })
                    .to_string())
                }
                StallingsOp::Member { graph, word } => {
                    let g = fold(&graph)?;
                    Ok(json!({"member": g.member(&parse_word(&word)?)?}).to_string())
                }
                StallingsOp::Index { graph } => {
                    let g = fold(&graph)?;
                    Ok(json!({"index": g.index_and_cosets().map(|t| t.len())}).to_string())
                }
                StallingsOp::Basis { graph } => {
                    let g = fold(&graph)?;
                    Ok(json!({"basis": g.free_basis().iter().map(|w| w.to_string()).collect::<Vec<_>>()}).to_string())
                }
                StallingsOp::Normal { graph } => {
                    let g = fold(&graph)?;
                    Ok(json!({"normal": g.is_normal()}).to_string())
                }
            }
        }
        Command::Snf { path } => {
            let m = IntMatrix::parse_text(&read_input(&path)?)?;
            let (group, _) = cokernel(&m);
            Ok(serde_json::to_string(&group).expect("serializable"))
        }
        Command::Abgroup { input } => {
            #[derive(serde::Deserialize)]
            struct Raw {
                rank: usize,
                torsion: Vec<i64>,
            }
            let raw: Raw = serde_json::from_str(&read_json_or_path(&input)?)
                .map_err(|e| GroupError::Invalid(format!("abgroup: {e}")))?;
            if raw.torsion.iter().any(|&d| d == 0) {
                return Err(GroupError::Invalid("zero torsion coefficient".into()));
            }
            // canonicalize the (possibly unordered) torsion list through the
            // diagonal relation matrix
            let dim = raw.rank + raw.torsion.len();
            let mut rel = IntMatrix::zeros(raw.torsion.len(), dim);
            for (i, &d) in raw.torsion.iter().enumerate() {
                rel.set(i, raw.rank + i, BigInt::from(d.abs()));
            }
            let (g, _) = cokernel(&rel);
            Ok(serde_json::to_string(&g).expect("serializable"))
        }
        Command::H2finite { group } => {
            let q = parse_finite_group(&group)?;
            Ok(serde_json::to_string(&h2_finite(&q)?).expect("serializable"))
        }
        Command::Fibre { op } => match op {
            FibreOp::Member { path, tuple } => {
                let spec = load_spec(&path)?;
                let t = parse_tuple(&tuple)?;
                Ok(json!({"member": spec.member(&t)?}).to_string())
            }
            FibreOp::Generators { path } => {
                let spec = load_spec(&path)?;
                let data = generators(&spec)?;
                Ok(json!({
                    "lifts": data.lifts.iter().map(|(u, v)| vec![u.to_string(), v.to_string()]).collect::<Vec<_>>(),
                    "kernel": [
                        data.kernel_parts.0.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                        data.kernel_parts.1.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                    ],
                    "exact": data.exact,
                })
                .to_string())
            }
            FibreOp::Classify { path } => {
                let spec = load_spec(&path)?;
                Ok(match classify_two_factor(&spec)? {
                    Classification::Free => json!({"classification": "free"}),
                    Classification::FinitelyPresented { index } => {
                        json!({"classification": "finitely_presented", "index": index})
                    }
                    Classification::FgNotFp => json!({"classification": "fg_not_fp"}),
                    Classification::NotFg => json!({"classification": "not_fg"}),
                    Classification::Unknown => json!({"classification": "unknown"}),
                }
                .to_string())
            }
            FibreOp::PredictH1 { path } => {
                let spec = load_spec(&path)?;
                Ok(serde_json::to_string(&predicted_h1(&spec)?).expect("serializable"))
            }
            FibreOp::OracleH1 { path } => {
                let spec = load_spec(&path)?;
                Ok(serde_json::to_string(&h1_oracle(&spec)?).expect("serializable"))
            }
        },
        Command::Sb { n, tuple } => {
            let (spec, gens) = sb_family(n)?;
            match tuple {
                Some(t) => {
                    let t = parse_tuple(&t)?;
                    Ok(json!({"member": spec.member(&t)?}).to_string())
                }
                None => Ok(json!({
                    "factors": n,
                    "generators": gens.iter().map(|g| words_json(g)).collect::<Vec<_>>(),
                })
                .to_string()),
            }
        }
        Command::Gamma { rank, class, word } => {
            let w = parse_word(&word)?;
            if w.max_letter() > rank {
                return Err(GroupError::LetterOutOfRange {
                    letter: w.max_letter() as i32,
                    rank,
                });
            }
            Ok(json!({"in_gamma": in_gamma(&w, rank, class)}).to_string())
        }
        Command::Conj { path } => {
            let inst: InstanceFile = serde_json::from_str(&read_input(&path)?)
                .map_err(|e| GroupError::Invalid(format!("instance: {e}")))?;
            let h = inst.subgroup()?;
            let x = InstanceFile::tuple(
                inst.x.as_ref().ok_or_else(|| GroupError::Invalid("missing x".into()))?,
            )?;
            let y = InstanceFile::tuple(
                inst.y.as_ref().ok_or_else(|| GroupError::Invalid("missing y".into()))?,
            )?;
            Ok(match subgroup_conjugacy(&x, &y, &h)? {
                Some(g) => json!({"result": "yes", "witness": words_json(&g)}),
                None => json!({"result": "no"}),
            }
            .to_string())
        }
        Command::Member { path } => {
            let inst: InstanceFile = serde_json::from_str(&read_input(&path)?)
                .map_err(|e| GroupError::Invalid(format!("instance: {e}")))?;
            let h = inst.subgroup()?;
            let elem = InstanceFile::tuple(
                inst.element
                    .as_ref()
                    .ok_or_else(|| GroupError::Invalid("missing element".into()))?,
            )?;
            match &inst.bounded {
                None => Ok(json!({"member": h.member(&elem)?}).to_string()),
                Some(b) => {
                    let gens: Vec<Vec<Word>> = b
                        .generators
                        .iter()
                        .map(|g| InstanceFile::tuple(g))
                        .collect::<Result<_, _>>()?;
                    let res = member_bounded(
                        &elem,
                        &gens,
                        &h.product,
                        b.length_bound,
                        b.order_bound,
                    )?;
                    Ok(match res {
                        MemberDecision::Yes { expression } => {
                            json!({"result": "yes", "expression": expression})
                        }
                        MemberDecision::No {
                            quotient,
                            letter_images,
                        } => json!({
                            "result": "no",
                            "quotient": quotient,
                            "letter_images": letter_images,
                        }),
                        MemberDecision::Unknown => json!({"result": "unknown"}),
                    }
                    .to_string())
                }
            }
        }
        Command::Bs { op } => match op {
            BsOp::Reduce { m, n, word } => {
                let g = BSGroup::new(m, n)?;
                Ok(g.reduce(&parse_bs_word(&word)?).to_string())
            }
            BsOp::H1window { m, n, lo, hi } => {
                let g = BSGroup::new(m, n)?;
                let t = h1_transition(lo, hi, &g)?;
                Ok(json!({
                    "two_sided_multiplier": t.two_sided_multiplier.to_string(),
                    "right_multiplier": t.right_multiplier.to_string(),
                    "shift_multiplier": t.shift_multiplier.to_string(),
                })
                .to_string())
            }
            BsOp::Fibre { m, n, left, right } => {
                let f = BSFibre {
                    group: BSGroup::new(m, n)?,
                };
                Ok(
                    json!({"member": f.member(&parse_bs_word(&left)?, &parse_bs_word(&right)?)})
                        .to_string(),
                )
            }
        },
    }
}

/// Entry point: parses argv, runs, prints. Usage errors exit 2 (from the
/// argument parser), domain errors print a JSON error object and exit 1.
pub fn main_entry() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(out) => {
            println!("{out}");
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", json!({"error": e.to_string()}));
            std::process::ExitCode::from(1)
        }
    }
}
