//! Contract predicates: trees of the three primitives (signature check,
//! preimage check, timeout check) organized into named redeem paths, plus the
//! relaxed predicate that ignores timeouts and conflicts.
//!
//! Predicate trees are immutable after construction and evaluation is pure.

use crate::ledger::{Digest, Hasher, PartyId, Preimage};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Names for the independently satisfiable disjuncts of the modeled contracts.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum RedeemPath {
    #[serde(rename = "dep-A")]
    DepA,
    #[serde(rename = "dep-B")]
    DepB,
    #[serde(rename = "dep-M")]
    DepM,
    #[serde(rename = "col-B")]
    ColB,
    #[serde(rename = "col-M")]
    ColM,
    #[serde(rename = "htlc-A")]
    HtlcA,
    #[serde(rename = "htlc-B")]
    HtlcB,
    /// Plain ownership payout (a single signature).
    #[serde(rename = "own")]
    Own,
    /// Vacuously true; used by unrelated base-fee transactions.
    #[serde(rename = "any")]
    Any,
}

impl fmt::Display for RedeemPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RedeemPath::DepA => "dep-A",
            RedeemPath::DepB => "dep-B",
            RedeemPath::DepM => "dep-M",
            RedeemPath::ColB => "col-B",
            RedeemPath::ColM => "col-M",
            RedeemPath::HtlcA => "htlc-A",
            RedeemPath::HtlcB => "htlc-B",
            RedeemPath::Own => "own",
            RedeemPath::Any => "any",
        };
        f.write_str(name)
    }
}

/// Positional preimage slot: slot 1 targets the first digest parameter, slot 2
/// the second. This mirrors the `(pre1, pre2, sig)` input arity and avoids
/// guessing which digest a bare preimage targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    One,
    Two,
}

impl Slot {
    pub fn index(self) -> u8 {
        match self {
            Slot::One => 1,
            Slot::Two => 2,
        }
    }
}

/// One predicate node. Leaves are the three primitives; interior nodes are
/// conjunctions and disjunctions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    And(Vec<Node>),
    Or(Vec<Node>),
    Sig(PartyId),
    PreImg { slot: Slot, digest: Digest },
    Time { timeout: u64 },
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::And(xs) => {
                write!(f, "and(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    x.fmt(f)?;
                }
                write!(f, ")")
            }
            Node::Or(xs) => {
                write!(f, "or(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    x.fmt(f)?;
                }
                write!(f, ")")
            }
            Node::Sig(pk) => write!(f, "vsig({pk})"),
            Node::PreImg { slot, digest } => write!(f, "vpreimg({}, {digest})", slot.index()),
            Node::Time { timeout } => write!(f, "vtime({timeout})"),
        }
    }
}

/// A contract predicate: a named map from redeem path to subtree. The whole
/// predicate is the disjunction of its paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateAst {
    paths: Vec<(RedeemPath, Node)>,
}

/// The data a redeeming transaction supplies: a path choice, up to two
/// preimages, and the creator identity standing in for a signature.
///
/// Witnesses published to the mempool reveal their contained preimages to all
/// parties; see [`crate::ledger::World::publish`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedeemWitness {
    pub path: RedeemPath,
    pub pre1: Option<Preimage>,
    pub pre2: Option<Preimage>,
    pub signer: PartyId,
}

impl RedeemWitness {
    pub fn new(
        path: RedeemPath,
        pre1: Option<Preimage>,
        pre2: Option<Preimage>,
        signer: PartyId,
    ) -> RedeemWitness {
        RedeemWitness {
            path,
            pre1,
            pre2,
            signer,
        }
    }

    pub fn vacuous() -> RedeemWitness {
        RedeemWitness::new(RedeemPath::Any, None, None, PartyId::External)
    }

    fn preimage(&self, slot: Slot) -> Option<&Preimage> {
        match slot {
            Slot::One => self.pre1.as_ref(),
            Slot::Two => self.pre2.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractBuildError {
    #[error("timeout must be at least 1")]
    ZeroTimeout,
    #[error("the two digests must differ")]
    EqualDigests,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("witness path {0} does not exist in this predicate")]
    PathNotFound(RedeemPath),
    #[error("timeout predicate on an unconfirmed contract")]
    TimeUndefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("path {0} is outside the relaxed predicate domain")]
pub struct UnknownPathError(pub RedeemPath);

impl PredicateAst {
    pub fn from_paths(paths: Vec<(RedeemPath, Node)>) -> PredicateAst {
        PredicateAst { paths }
    }

    pub fn paths(&self) -> &[(RedeemPath, Node)] {
        &self.paths
    }

    pub fn path(&self, name: RedeemPath) -> Option<&Node> {
        self.paths.iter().find(|(p, _)| *p == name).map(|(_, n)| n)
    }

    pub fn has_path(&self, name: RedeemPath) -> bool {
        self.path(name).is_some()
    }

    /// Single-signature payout predicate.
    pub fn ownership(owner: PartyId) -> PredicateAst {
        PredicateAst::from_paths(vec![(RedeemPath::Own, Node::Sig(owner))])
    }

    /// Constant-true predicate (an empty conjunction).
    pub fn vacuous() -> PredicateAst {
        PredicateAst::from_paths(vec![(RedeemPath::Any, Node::And(vec![]))])
    }

    pub fn is_ownership_of(&self, party: PartyId) -> bool {
        matches!(
            self.paths.as_slice(),
            [(RedeemPath::Own, Node::Sig(p))] if *p == party
        )
    }

    /// Every digest referenced by a preimage leaf, across all paths.
    pub fn preimage_digests(&self) -> BTreeSet<Digest> {
        fn walk(node: &Node, out: &mut BTreeSet<Digest>) {
            match node {
                Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| walk(x, out)),
                Node::PreImg { digest, .. } => {
                    out.insert(digest.clone());
                }
                Node::Sig(_) | Node::Time { .. } => {}
            }
        }
        let mut out = BTreeSet::new();
        for (_, node) in &self.paths {
            walk(node, &mut out);
        }
        out
    }

    /// Canonical structured-text form with stable field order, for golden
    /// files and diffs.
    pub fn canonical_text(&self) -> String {
        let mut s = String::from("predicate {\n");
        for (name, node) in &self.paths {
            s.push_str(&format!("  path {name}: {node}\n"));
        }
        s.push('}');
        s
    }
}

impl fmt::Display for PredicateAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

/// The two-path hashed time-locked contract: the first party redeems with the
/// preimage at any time, the second with a signature after the timeout.
pub fn make_htlc(
    pk_a: PartyId,
    pk_b: PartyId,
    timeout: u64,
    dig_a: Digest,
) -> Result<PredicateAst, ContractBuildError> {
    if timeout == 0 {
        return Err(ContractBuildError::ZeroTimeout);
    }
    Ok(PredicateAst::from_paths(vec![
        (
            RedeemPath::HtlcA,
            Node::And(vec![
                Node::PreImg {
                    slot: Slot::One,
                    digest: dig_a,
                },
                Node::Sig(pk_a),
            ]),
        ),
        (
            RedeemPath::HtlcB,
            Node::And(vec![Node::Sig(pk_b), Node::Time { timeout }]),
        ),
    ]))
}

/// The three-path deposit contract: the first party with preimage 1, the
/// second party with preimage 2 after the timeout, or anyone with both
/// preimages.
pub fn make_mh_dep(
    pk_a: PartyId,
    pk_b: PartyId,
    timeout: u64,
    dig_a: Digest,
    dig_b: Digest,
) -> Result<PredicateAst, ContractBuildError> {
    if timeout == 0 {
        return Err(ContractBuildError::ZeroTimeout);
    }
    if dig_a == dig_b {
        return Err(ContractBuildError::EqualDigests);
    }
    Ok(PredicateAst::from_paths(vec![
        (
            RedeemPath::DepA,
            Node::And(vec![
                Node::PreImg {
                    slot: Slot::One,
                    digest: dig_a.clone(),
                },
                Node::Sig(pk_a),
            ]),
        ),
        (
            RedeemPath::DepB,
            Node::And(vec![
                Node::PreImg {
                    slot: Slot::Two,
                    digest: dig_b.clone(),
                },
                Node::Sig(pk_b),
                Node::Time { timeout },
            ]),
        ),
        (
            RedeemPath::DepM,
            Node::And(vec![
                Node::PreImg {
                    slot: Slot::One,
                    digest: dig_a,
                },
                Node::PreImg {
                    slot: Slot::Two,
                    digest: dig_b,
                },
            ]),
        ),
    ]))
}

/// The two-path collateral contract. Both paths are gated by the shared
/// timeout: the second party with a signature, or anyone with both preimages.
pub fn make_mh_col(
    pk_b: PartyId,
    timeout: u64,
    dig_a: Digest,
    dig_b: Digest,
) -> Result<PredicateAst, ContractBuildError> {
    if timeout == 0 {
        return Err(ContractBuildError::ZeroTimeout);
    }
    if dig_a == dig_b {
        return Err(ContractBuildError::EqualDigests);
    }
    Ok(PredicateAst::from_paths(vec![
        (
            RedeemPath::ColB,
            Node::And(vec![Node::Time { timeout }, Node::Sig(pk_b)]),
        ),
        (
            RedeemPath::ColM,
            Node::And(vec![
                Node::Time { timeout },
                Node::PreImg {
                    slot: Slot::One,
                    digest: dig_a,
                },
                Node::PreImg {
                    slot: Slot::Two,
                    digest: dig_b,
                },
            ]),
        ),
    ]))
}

/// The relaxed contract predicate: timeouts and conflicts disregarded.
/// `has_a`/`has_b` say whether the redeeming party holds a suitable preimage
/// for the first/second digest.
pub fn relaxed_predicate(
    path: RedeemPath,
    party: PartyId,
    has_a: bool,
    has_b: bool,
) -> Result<bool, UnknownPathError> {
    match path {
        RedeemPath::DepA => Ok(party == PartyId::Alice && has_a),
        RedeemPath::DepB => Ok(party == PartyId::Bob && has_b),
        RedeemPath::DepM | RedeemPath::ColM => Ok(has_a && has_b),
        RedeemPath::ColB => Ok(party == PartyId::Bob),
        other => Err(UnknownPathError(other)),
    }
}

fn eval_node(
    node: &Node,
    witness: &RedeemWitness,
    hasher: &Hasher,
    init_height: Option<u64>,
    at_height: u64,
) -> Result<bool, EvalError> {
    match node {
        Node::And(xs) => {
            for x in xs {
                if !eval_node(x, witness, hasher, init_height, at_height)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Node::Or(xs) => {
            for x in xs {
                if eval_node(x, witness, hasher, init_height, at_height)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Node::Sig(pk) => Ok(witness.signer == *pk),
        Node::PreImg { slot, digest } => Ok(witness
            .preimage(*slot)
            .is_some_and(|p| hasher.digest_preimage(p) == *digest)),
        Node::Time { timeout } => {
            let init = init_height.ok_or(EvalError::TimeUndefined)?;
            Ok(at_height >= init + timeout)
        }
    }
}

/// Evaluates the witness's chosen path at `at_height`. A transaction in a
/// block at least `timeout` blocks after the initiating block satisfies a
/// timeout leaf. Missing preimages make the leaf false, not an error; a
/// timeout leaf on an unconfirmed contract is an error.
pub fn evaluate(
    ast: &PredicateAst,
    witness: &RedeemWitness,
    hasher: &Hasher,
    init_height: Option<u64>,
    at_height: u64,
) -> Result<bool, EvalError> {
    let node = ast
        .path(witness.path)
        .ok_or(EvalError::PathNotFound(witness.path))?;
    eval_node(node, witness, hasher, init_height, at_height)
}

/// Classifies a path evaluation for transaction validation: satisfied now,
/// satisfied at a known later height, or unsatisfiable with this witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathEval {
    Satisfied,
    TimeLocked { earliest: u64 },
    Unsatisfied,
}

pub fn evaluate_detailed(
    ast: &PredicateAst,
    witness: &RedeemWitness,
    hasher: &Hasher,
    init_height: Option<u64>,
    at_height: u64,
) -> Result<PathEval, EvalError> {
    if evaluate(ast, witness, hasher, init_height, at_height)? {
        return Ok(PathEval::Satisfied);
    }
    let node = ast
        .path(witness.path)
        .ok_or(EvalError::PathNotFound(witness.path))?;
    // Candidate heights are exactly the timeout thresholds of the path.
    let mut candidates = BTreeSet::new();
    fn collect(node: &Node, init: Option<u64>, out: &mut BTreeSet<u64>) {
        match node {
            Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| collect(x, init, out)),
            Node::Time { timeout } => {
                if let Some(init) = init {
                    out.insert(init + timeout);
                }
            }
            _ => {}
        }
    }
    collect(node, init_height, &mut candidates);
    for h in candidates {
        if h > at_height && evaluate(ast, witness, hasher, init_height, h)? {
            return Ok(PathEval::TimeLocked { earliest: h });
        }
    }
    Ok(PathEval::Unsatisfied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        hasher: Hasher,
        pre_a: Preimage,
        pre_b: Preimage,
        dep: PredicateAst,
        col: PredicateAst,
        htlc: PredicateAst,
        timeout: u64,
    }

    fn fixture() -> Fixture {
        let hasher = Hasher::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let pre_a = Preimage::random(&mut rng, 256);
        let pre_b = Preimage::random(&mut rng, 256);
        let dig_a = hasher.digest_preimage(&pre_a);
        let dig_b = hasher.digest_preimage(&pre_b);
        let timeout = 5;
        Fixture {
            dep: make_mh_dep(
                PartyId::Alice,
                PartyId::Bob,
                timeout,
                dig_a.clone(),
                dig_b.clone(),
            )
            .unwrap(),
            col: make_mh_col(PartyId::Bob, timeout, dig_a.clone(), dig_b.clone()).unwrap(),
            htlc: make_htlc(PartyId::Alice, PartyId::Bob, timeout, dig_a).unwrap(),
            hasher,
            pre_a,
            pre_b,
            timeout,
        }
    }

    impl Fixture {
        fn witness(
            &self,
            path: RedeemPath,
            has_a: bool,
            has_b: bool,
            signer: PartyId,
        ) -> RedeemWitness {
            RedeemWitness::new(
                path,
                has_a.then(|| self.pre_a.clone()),
                has_b.then(|| self.pre_b.clone()),
                signer,
            )
        }

        fn ast_for(&self, path: RedeemPath) -> &PredicateAst {
            match path {
                RedeemPath::ColB | RedeemPath::ColM => &self.col,
                RedeemPath::HtlcA | RedeemPath::HtlcB => &self.htlc,
                _ => &self.dep,
            }
        }
    }

    #[test]
    fn constructor_guards() {
        let f = fixture();
        let d = f.hasher.digest(b"x");
        assert_eq!(
            make_htlc(PartyId::Alice, PartyId::Bob, 0, d.clone()),
            Err(ContractBuildError::ZeroTimeout)
        );
        assert_eq!(
            make_mh_dep(PartyId::Alice, PartyId::Bob, 3, d.clone(), d.clone()),
            Err(ContractBuildError::EqualDigests)
        );
        assert_eq!(
            make_mh_col(PartyId::Bob, 3, d.clone(), d),
            Err(ContractBuildError::EqualDigests)
        );
    }

    #[test]
    fn htlc_paths_behave_as_specified() {
        let f = fixture();
        let w = f.witness(RedeemPath::HtlcA, true, false, PartyId::Alice);
        assert_eq!(evaluate(&f.htlc, &w, &f.hasher, Some(10), 11), Ok(true));

        let wb = f.witness(RedeemPath::HtlcB, false, false, PartyId::Bob);
        assert_eq!(
            evaluate(&f.htlc, &wb, &f.hasher, Some(10), 10 + f.timeout - 1),
            Ok(false)
        );
        assert_eq!(
            evaluate(&f.htlc, &wb, &f.hasher, Some(10), 10 + f.timeout),
            Ok(true)
        );

        let wrong = RedeemWitness::new(
            RedeemPath::HtlcA,
            Some(f.pre_b.clone()),
            None,
            PartyId::Alice,
        );
        assert_eq!(evaluate(&f.htlc, &wrong, &f.hasher, Some(10), 11), Ok(false));
    }

    #[test]
    fn dep_paths_behave_as_specified() {
        let f = fixture();
        // The both-preimages path is open to anyone, even in the next block.
        let w = f.witness(RedeemPath::DepM, true, true, PartyId::Miner(3));
        assert_eq!(evaluate(&f.dep, &w, &f.hasher, Some(10), 11), Ok(true));

        // The first path is only available to its keyholder.
        let w = f.witness(RedeemPath::DepA, true, false, PartyId::Bob);
        assert_eq!(evaluate(&f.dep, &w, &f.hasher, Some(10), 11), Ok(false));

        // The second path is blocked before the timeout.
        let w = f.witness(RedeemPath::DepB, false, true, PartyId::Bob);
        assert_eq!(
            evaluate(&f.dep, &w, &f.hasher, Some(10), 10 + f.timeout - 1),
            Ok(false)
        );
    }

    #[test]
    fn col_paths_behave_as_specified() {
        let f = fixture();
        let wb = f.witness(RedeemPath::ColB, false, false, PartyId::Bob);
        assert_eq!(
            evaluate(&f.col, &wb, &f.hasher, Some(10), 10 + f.timeout),
            Ok(true)
        );
        assert_eq!(
            evaluate(&f.col, &wb, &f.hasher, Some(10), 10 + f.timeout - 1),
            Ok(false)
        );
        let wm = f.witness(RedeemPath::ColM, true, true, PartyId::Miner(1));
        assert_eq!(
            evaluate(&f.col, &wm, &f.hasher, Some(10), 10 + f.timeout),
            Ok(true)
        );
    }

    #[test]
    fn relaxed_predicate_matches_its_defining_cases() {
        assert_eq!(
            relaxed_predicate(RedeemPath::DepA, PartyId::Alice, true, false),
            Ok(true)
        );
        assert_eq!(
            relaxed_predicate(RedeemPath::ColB, PartyId::Bob, false, false),
            Ok(true)
        );
        assert_eq!(
            relaxed_predicate(RedeemPath::DepM, PartyId::Miner(1), true, false),
            Ok(false)
        );
        assert!(relaxed_predicate(RedeemPath::HtlcA, PartyId::Alice, true, true).is_err());
    }

    #[test]
    fn empty_combinator_identities() {
        let f = fixture();
        let t = PredicateAst::from_paths(vec![(RedeemPath::Any, Node::And(vec![]))]);
        let e = PredicateAst::from_paths(vec![(RedeemPath::Any, Node::Or(vec![]))]);
        let w = RedeemWitness::vacuous();
        assert_eq!(evaluate(&t, &w, &f.hasher, None, 1), Ok(true));
        assert_eq!(evaluate(&e, &w, &f.hasher, None, 1), Ok(false));
    }

    #[test]
    fn vtime_on_unconfirmed_contract_is_an_error() {
        let f = fixture();
        let w = f.witness(RedeemPath::DepB, false, true, PartyId::Bob);
        assert_eq!(
            evaluate(&f.dep, &w, &f.hasher, None, 100),
            Err(EvalError::TimeUndefined)
        );
    }

    #[test]
    fn missing_path_is_an_error() {
        let f = fixture();
        let w = f.witness(RedeemPath::ColB, false, false, PartyId::Bob);
        assert_eq!(
            evaluate(&f.dep, &w, &f.hasher, Some(1), 100),
            Err(EvalError::PathNotFound(RedeemPath::ColB))
        );
    }

    /// Exhaustive agreement between the full predicates (at a timeout-satisfied
    /// height, correctly signed) and the relaxed predicate: 5 paths × 3
    /// parties × 4 preimage-availability combinations.
    #[test]
    fn full_and_relaxed_predicates_agree_on_all_60_cases() {
        let f = fixture();
        let paths = [
            RedeemPath::DepA,
            RedeemPath::DepB,
            RedeemPath::DepM,
            RedeemPath::ColB,
            RedeemPath::ColM,
        ];
        let parties = [PartyId::Alice, PartyId::Bob, PartyId::Miner(1)];
        let mut cases = 0;
        for path in paths {
            for party in parties {
                for (has_a, has_b) in [(false, false), (false, true), (true, false), (true, true)]
                {
                    let w = f.witness(path, has_a, has_b, party);
                    let full = evaluate(
                        f.ast_for(path),
                        &w,
                        &f.hasher,
                        Some(10),
                        10 + f.timeout,
                    )
                    .unwrap();
                    let relaxed = relaxed_predicate(path, party, has_a, has_b).unwrap();
                    assert_eq!(full, relaxed, "path {path} party {party} ({has_a},{has_b})");
                    cases += 1;
                }
            }
        }
        assert_eq!(cases, 60);
    }

    /// Which entities can produce a valid redeeming transaction, per
    /// publication state of the two preimages. `published(a, b)` is the
    /// knowledge available to everyone.
    fn redeemers(f: &Fixture, ast: &PredicateAst, pub_a: bool, pub_b: bool) -> Vec<PartyId> {
        let parties = [PartyId::Alice, PartyId::Bob, PartyId::Miner(1)];
        let paths = [
            RedeemPath::DepA,
            RedeemPath::DepB,
            RedeemPath::DepM,
            RedeemPath::ColB,
            RedeemPath::ColM,
        ];
        parties
            .into_iter()
            .filter(|&party| {
                paths.iter().any(|&path| {
                    ast.has_path(path)
                        && evaluate(
                            ast,
                            &f.witness(path, pub_a, pub_b, party),
                            &f.hasher,
                            Some(10),
                            10 + f.timeout,
                        )
                        .unwrap()
                })
            })
            .collect()
    }

    #[test]
    fn dep_redeeming_entity_table() {
        let f = fixture();
        let all = vec![PartyId::Alice, PartyId::Bob, PartyId::Miner(1)];
        assert_eq!(redeemers(&f, &f.dep, true, true), all);
        assert_eq!(redeemers(&f, &f.dep, true, false), vec![PartyId::Alice]);
        assert_eq!(redeemers(&f, &f.dep, false, true), vec![PartyId::Bob]);
        assert_eq!(redeemers(&f, &f.dep, false, false), vec![]);
    }

    #[test]
    fn col_redeeming_entity_table() {
        let f = fixture();
        let all = vec![PartyId::Alice, PartyId::Bob, PartyId::Miner(1)];
        assert_eq!(redeemers(&f, &f.col, true, true), all);
        assert_eq!(redeemers(&f, &f.col, true, false), vec![PartyId::Bob]);
        assert_eq!(redeemers(&f, &f.col, false, true), vec![PartyId::Bob]);
        assert_eq!(redeemers(&f, &f.col, false, false), vec![PartyId::Bob]);
    }

    #[test]
    fn canonical_text_is_stable() {
        let dig_a = Digest(vec![0xaa, 0xbb]);
        let dig_b = Digest(vec![0xcc, 0xdd]);
        let ast = make_mh_dep(PartyId::Alice, PartyId::Bob, 5, dig_a, dig_b).unwrap();
        assert_eq!(
            ast.canonical_text(),
            "predicate {\n  \
             path dep-A: and(vpreimg(1, 0xaabb), vsig(alice))\n  \
             path dep-B: and(vpreimg(2, 0xccdd), vsig(bob), vtime(5))\n  \
             path dep-M: and(vpreimg(1, 0xaabb), vpreimg(2, 0xccdd))\n\
             }"
        );
    }

    proptest! {
        /// Once true, a path stays true at every later height.
        #[test]
        fn time_monotonicity(
            path_idx in 0usize..5,
            has_a: bool,
            has_b: bool,
            party_idx in 0usize..3,
            h1 in 0u64..20,
            dh in 1u64..20,
        ) {
            let f = fixture();
            let paths = [
                RedeemPath::DepA,
                RedeemPath::DepB,
                RedeemPath::DepM,
                RedeemPath::ColB,
                RedeemPath::ColM,
            ];
            let parties = [PartyId::Alice, PartyId::Bob, PartyId::Miner(1)];
            let path = paths[path_idx];
            let w = f.witness(path, has_a, has_b, parties[party_idx]);
            let ast = f.ast_for(path);
            let at1 = evaluate(ast, &w, &f.hasher, Some(0), h1).unwrap();
            let at2 = evaluate(ast, &w, &f.hasher, Some(0), h1 + dh).unwrap();
            prop_assert!(!at1 || at2);
        }
    }
}
