//! Operator specifications of the form `name[:param,param,...]`.
//!
//! Matrix operators act on `ℓp`; block operators act on `Z2`. In a `Z2`
//! context a matrix operator `A` is lifted to `τ_A = (A 0; 0 A)`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z2lab::blockop::{block_operator_tu, calderon_upper, rank_one, scalar_matrix, tau, BlockOperator};
use z2lab::zoo::{
    alpha0, cesaro, diagonal_z2, hausdorff_matrix, hilbert_matrix, moment_euler, moment_gamma, moment_gen_cesaro,
    moment_holder, normalized_blocks, random_blocks, random_signed_permutation, shift, HausdorffSpec,
    MomentSequence, ShiftDirection,
};
use z2lab::{LinearMap, PExponent, Result as CoreResult, SeqVec, Z2Functional, Z2Vec};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum DiagPattern {
    Ones,
    ConstGap(f64),
    LogGap(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixOp {
    Identity,
    Cesaro,
    Hilbert(f64),
    Hausdorff(HausdorffFamily),
    Shift(ShiftDirection),
    SignedPermutation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HausdorffFamily {
    Holder(f64),
    Euler(f64),
    Gamma(f64, f64),
    GenCesaro(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockOp {
    Tau(MatrixOp),
    Diag(DiagPattern),
    Scalar([f64; 4]),
    RankOneAlpha0,
    RankOneE1,
    TuNormalized(usize),
    TuRandom(usize),
    Ip,
    Calderon(MatrixOp, MatrixOp),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpSpec {
    Matrix(MatrixOp),
    Block(BlockOp),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn numbers(s: &str, count: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("{what}: '{t}' is not a number"))))
        .collect::<Result<_, _>>()?;
    if v.len() != count {
        return Err(usage(format!("{what} expects {count} parameter(s), got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(usage(format!("{what}: parameters must be finite")));
    }
    Ok(v)
}

fn block_length(s: &str, what: &str) -> Result<usize, CliError> {
    match s.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(usage(format!("{what}: block length must be a positive integer"))),
    }
}

fn parse_matrix(spec: &str) -> Result<MatrixOp, CliError> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (spec, None),
    };
    let no_params = |op: MatrixOp| match rest {
        None => Ok(op),
        Some(_) => Err(usage(format!("'{name}' takes no parameters"))),
    };
    match name {
        "identity" => no_params(MatrixOp::Identity),
        "cesaro" => no_params(MatrixOp::Cesaro),
        "perm" => no_params(MatrixOp::SignedPermutation),
        "hilbert" => {
            let l = numbers(rest.ok_or_else(|| usage("hilbert needs a parameter, e.g. hilbert:1"))?, 1, "hilbert")?;
            Ok(MatrixOp::Hilbert(l[0]))
        }
        "shift" => match rest {
            Some("right") => Ok(MatrixOp::Shift(ShiftDirection::Right)),
            Some("left") => Ok(MatrixOp::Shift(ShiftDirection::Left)),
            _ => Err(usage("shift needs a direction: shift:right or shift:left")),
        },
        "hausdorff" => {
            let rest = rest.ok_or_else(|| usage("hausdorff needs a family, e.g. hausdorff:euler:0.5"))?;
            let (family, params) = rest
                .split_once(':')
                .ok_or_else(|| usage("hausdorff needs family parameters, e.g. hausdorff:gamma:2,1"))?;
            let fam = match family {
                "holder" => HausdorffFamily::Holder(numbers(params, 1, "holder")?[0]),
                "euler" => HausdorffFamily::Euler(numbers(params, 1, "euler")?[0]),
                "gamma" => {
                    let v = numbers(params, 2, "gamma")?;
                    HausdorffFamily::Gamma(v[0], v[1])
                }
                "gen-cesaro" => {
                    let v = numbers(params, 2, "gen-cesaro")?;
                    HausdorffFamily::GenCesaro(v[0], v[1])
                }
                other => return Err(usage(format!("unknown Hausdorff family '{other}'"))),
            };
            Ok(MatrixOp::Hausdorff(fam))
        }
        other => Err(usage(format!("unknown matrix operator '{other}'"))),
    }
}

/// Parses an operator specification.
pub fn parse(spec: &str) -> Result<OpSpec, CliError> {
    let spec = spec.trim();
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (spec, None),
    };
    let block = |b: BlockOp| Ok(OpSpec::Block(b));
    match name {
        "ip" if rest.is_none() => block(BlockOp::Ip),
        "tau-perm" if rest.is_none() => block(BlockOp::Tau(MatrixOp::SignedPermutation)),
        "tau" => block(BlockOp::Tau(parse_matrix(rest.ok_or_else(|| usage("tau needs an inner operator"))?)?)),
        "scalar" => {
            let v = numbers(rest.ok_or_else(|| usage("scalar needs a,b,d,g"))?, 4, "scalar")?;
            block(BlockOp::Scalar([v[0], v[1], v[2], v[3]]))
        }
        "diag" => match rest {
            Some("ones") => block(BlockOp::Diag(DiagPattern::Ones)),
            Some(r) => {
                let (pattern, c) = r.split_once(':').ok_or_else(|| usage("diag needs const-gap:c, log-gap:c or ones"))?;
                let c = numbers(c, 1, "diag")?[0];
                match pattern {
                    "const-gap" => block(BlockOp::Diag(DiagPattern::ConstGap(c))),
                    "log-gap" => block(BlockOp::Diag(DiagPattern::LogGap(c))),
                    other => Err(usage(format!("unknown diagonal pattern '{other}'"))),
                }
            }
            None => Err(usage("diag needs a pattern: const-gap:c, log-gap:c or ones")),
        },
        "rank1" => match rest {
            Some("alpha0") => block(BlockOp::RankOneAlpha0),
            Some("e1") => block(BlockOp::RankOneE1),
            _ => Err(usage("rank1 needs alpha0 or e1")),
        },
        "TU" => {
            let r = rest.ok_or_else(|| usage("TU needs normalized-blocks:k or random-blocks:k"))?;
            let (kind, k) = r.split_once(':').ok_or_else(|| usage("TU needs a block length, e.g. TU:normalized-blocks:4"))?;
            let k = block_length(k, "TU")?;
            match kind {
                "normalized-blocks" => block(BlockOp::TuNormalized(k)),
                "random-blocks" => block(BlockOp::TuRandom(k)),
                other => Err(usage(format!("unknown block system '{other}'"))),
            }
        }
        "calderon" => {
            let r = rest.ok_or_else(|| usage("calderon needs two matrix operators, e.g. calderon:identity,cesaro"))?;
            let (a, b) = r.split_once(',').ok_or_else(|| usage("calderon needs two comma-separated operators"))?;
            block(BlockOp::Calderon(parse_matrix(a)?, parse_matrix(b)?))
        }
        _ => parse_matrix(spec).map(OpSpec::Matrix),
    }
}

fn size_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

impl HausdorffFamily {
    pub fn moment(&self) -> CoreResult<MomentSequence> {
        match *self {
            HausdorffFamily::Holder(a) => moment_holder(a),
            HausdorffFamily::Euler(a) => moment_euler(a),
            HausdorffFamily::Gamma(a, al) => moment_gamma(a, al),
            HausdorffFamily::GenCesaro(a, al) => moment_gen_cesaro(a, al),
        }
    }
}

impl MatrixOp {
    pub fn build(&self, n: usize, seed: u64) -> CoreResult<LinearMap> {
        Ok(match self {
            MatrixOp::Identity => LinearMap::identity(n),
            MatrixOp::Cesaro => cesaro(n),
            MatrixOp::Hilbert(l) => hilbert_matrix(n, *l)?,
            MatrixOp::Hausdorff(f) => hausdorff_matrix(&HausdorffSpec::new(f.moment()?, n))?,
            MatrixOp::Shift(d) => shift(n, *d),
            MatrixOp::SignedPermutation => {
                random_signed_permutation(n, &mut ChaCha8Rng::seed_from_u64(size_seed(seed, n)))
            }
        })
    }

    /// Closed-form norm of the infinite operator on `ℓp`, when known.
    pub fn reference_norm(&self, p: PExponent) -> CoreResult<Option<f64>> {
        let pv = p.value();
        Ok(match self {
            MatrixOp::Identity | MatrixOp::SignedPermutation => Some(1.0),
            MatrixOp::Shift(_) => Some(1.0),
            MatrixOp::Cesaro => (pv > 1.0 && pv.is_finite()).then(|| pv / (pv - 1.0)),
            MatrixOp::Hausdorff(f) => f.moment()?.lp_norm_formula(p),
            MatrixOp::Hilbert(_) => None,
        })
    }
}

impl BlockOp {
    pub fn build(&self, n: usize, seed: u64) -> CoreResult<BlockOperator> {
        match self {
            BlockOp::Tau(m) => Ok(tau(&m.build(n, seed)?)),
            BlockOp::Diag(pattern) => {
                let mut s = vec![1.0; 2 * n];
                for k in 0..n {
                    s[2 * k + 1] = match pattern {
                        DiagPattern::Ones => 1.0,
                        DiagPattern::ConstGap(c) => 1.0 - c,
                        DiagPattern::LogGap(c) => 1.0 - c / ((k + 2) as f64).ln(),
                    };
                }
                diagonal_z2(&SeqVec::new(s)?)
            }
            BlockOp::Scalar([a, b, d, g]) => Ok(scalar_matrix(*a, *b, *d, *g, n)),
            BlockOp::RankOneAlpha0 => Ok(tau(&alpha0(n))),
            BlockOp::RankOneE1 => {
                let e1 = SeqVec::basis(n, 0);
                let f = Z2Functional::new(SeqVec::zeros(n), e1.clone())?;
                let v = Z2Vec::new(e1, SeqVec::zeros(n))?;
                Ok(rank_one(&f, &v))
            }
            BlockOp::TuNormalized(k) => block_operator_tu(&normalized_blocks(n, *k)?),
            BlockOp::TuRandom(k) => {
                block_operator_tu(&random_blocks(n, *k, &mut ChaCha8Rng::seed_from_u64(size_seed(seed, n)))?)
            }
            BlockOp::Ip => Ok(BlockOperator::ip(n)),
            BlockOp::Calderon(a, b) => calderon_upper(&a.build(n, seed)?, &b.build(n, seed)?),
        }
    }
}

impl OpSpec {
    pub fn build_block(&self, n: usize, seed: u64) -> CoreResult<BlockOperator> {
        match self {
            OpSpec::Matrix(m) => Ok(tau(&m.build(n, seed)?)),
            OpSpec::Block(b) => b.build(n, seed),
        }
    }

    pub fn as_matrix(&self) -> Result<&MatrixOp, CliError> {
        match self {
            OpSpec::Matrix(m) => Ok(m),
            OpSpec::Block(_) => Err(usage("this operator acts on Z2; use --z2 or a matrix operator")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        assert_eq!(parse("identity").unwrap(), OpSpec::Matrix(MatrixOp::Identity));
        assert_eq!(parse("hilbert:1").unwrap(), OpSpec::Matrix(MatrixOp::Hilbert(1.0)));
        assert_eq!(
            parse("hausdorff:gamma:2,1").unwrap(),
            OpSpec::Matrix(MatrixOp::Hausdorff(HausdorffFamily::Gamma(2.0, 1.0)))
        );
        assert_eq!(parse("scalar:1,0,1,1").unwrap(), OpSpec::Block(BlockOp::Scalar([1.0, 0.0, 1.0, 1.0])));
        assert_eq!(parse("TU:normalized-blocks:4").unwrap(), OpSpec::Block(BlockOp::TuNormalized(4)));
        assert_eq!(parse("tau:cesaro").unwrap(), OpSpec::Block(BlockOp::Tau(MatrixOp::Cesaro)));
        assert_eq!(
            parse("calderon:identity,shift:right").unwrap(),
            OpSpec::Block(BlockOp::Calderon(MatrixOp::Identity, MatrixOp::Shift(ShiftDirection::Right)))
        );
        assert_eq!(parse("diag:log-gap:0.5").unwrap(), OpSpec::Block(BlockOp::Diag(DiagPattern::LogGap(0.5))));
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["nope", "scalar:1,2", "hilbert", "hilbert:x", "TU:normalized-blocks:0", "shift:up", "cesaro:3"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn builds_operators() {
        let t = parse("diag:ones").unwrap().build_block(5, 0).unwrap();
        assert_eq!(t.max_abs_diff(&BlockOperator::identity(5)), 0.0);
        let a = parse("tau-perm").unwrap().build_block(8, 3).unwrap();
        assert_eq!(a, parse("tau-perm").unwrap().build_block(8, 3).unwrap());
        assert!(parse("hilbert:-3").unwrap().as_matrix().unwrap().build(4, 0).is_err());
    }
}
