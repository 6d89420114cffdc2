//! A stack-machine interpreter for the script renditions of the three
//! contracts, plus witness construction and a differential harness that pits
//! the VM against the predicate-tree evaluator.
//!
//! Script evaluation concatenates the witness pushes with the contract
//! program and executes the whole; a run is accepted iff it finishes without
//! faults and the stack holds exactly one truthy element. All runtime faults
//! soft-fail: the result is `false` with a reason, never a panic.

use crate::contracts::{self, PredicateAst, RedeemPath, RedeemWitness};
use crate::ledger::{Digest, Hasher, PartyId, Preimage};
use rand::Rng;
use serde::Serialize;
use std::fmt;

const PK_TAG: u8 = 0x50;
const SIG_TAG: u8 = 0x51;

fn party_bytes(p: PartyId) -> Vec<u8> {
    match p {
        PartyId::Alice => vec![0x41],
        PartyId::Bob => vec![0x42],
        PartyId::Miner(i) => {
            let mut v = vec![0x4d];
            v.extend_from_slice(&i.to_le_bytes());
            v
        }
        PartyId::External => vec![0x58],
    }
}

/// Public-key stand-in pushed by contract programs.
pub fn pk_bytes(p: PartyId) -> Vec<u8> {
    let mut v = vec![PK_TAG];
    v.extend(party_bytes(p));
    v
}

/// Signature token: tagged bytes naming the signer.
pub fn sig_bytes(p: PartyId) -> Vec<u8> {
    let mut v = vec![SIG_TAG];
    v.extend(party_bytes(p));
    v
}

/// Minimal little-endian script-number encoding of a non-negative integer.
pub fn encode_num(mut n: u64) -> Vec<u8> {
    let mut out = Vec::new();
    while n > 0 {
        out.push((n & 0xff) as u8);
        n >>= 8;
    }
    if let Some(&last) = out.last() {
        if last & 0x80 != 0 {
            out.push(0);
        }
    }
    out
}

fn decode_num(bytes: &[u8]) -> Option<u64> {
    if bytes.len() > 8 {
        return None;
    }
    if let Some(&last) = bytes.last() {
        if last & 0x80 != 0 {
            return None; // negative numbers never appear in these contracts
        }
    }
    let mut n: u64 = 0;
    for (i, &b) in bytes.iter().enumerate() {
        n |= (b as u64) << (8 * i);
    }
    Some(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Hash160,
    Equal,
    Swap,
    If,
    Else,
    EndIf,
    CheckSig,
    CheckSequenceVerify,
    Drop,
    Verify,
    Push0,
    Push1,
    Push(Vec<u8>),
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Hash160 => f.write_str("OP_HASH160"),
            Op::Equal => f.write_str("OP_EQUAL"),
            Op::Swap => f.write_str("OP_SWAP"),
            Op::If => f.write_str("OP_IF"),
            Op::Else => f.write_str("OP_ELSE"),
            Op::EndIf => f.write_str("OP_ENDIF"),
            Op::CheckSig => f.write_str("OP_CHECKSIG"),
            Op::CheckSequenceVerify => f.write_str("OP_CHECKSEQUENCEVERIFY"),
            Op::Drop => f.write_str("OP_DROP"),
            Op::Verify => f.write_str("OP_VERIFY"),
            Op::Push0 => f.write_str("OP_0"),
            Op::Push1 => f.write_str("OP_1"),
            Op::Push(v) => write!(f, "0x{}", hex::encode(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptProgram {
    pub ops: Vec<Op>,
}

impl ScriptProgram {
    pub fn new(ops: Vec<Op>) -> ScriptProgram {
        ScriptProgram { ops }
    }

    /// One token per whitespace-separated word, pushes as hex with a `0x`
    /// prefix. [`parse_script`] inverts this exactly.
    pub fn to_text(&self) -> String {
        self.ops
            .iter()
            .map(|op| op.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn count(&self, pred: impl Fn(&Op) -> bool) -> usize {
        self.ops.iter().filter(|op| pred(op)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized script token {0:?}")]
pub struct ScriptParseError(pub String);

pub fn parse_script(text: &str) -> Result<ScriptProgram, ScriptParseError> {
    let mut ops = Vec::new();
    for token in text.split_whitespace() {
        let op = match token {
            "OP_HASH160" => Op::Hash160,
            "OP_EQUAL" => Op::Equal,
            "OP_SWAP" => Op::Swap,
            "OP_IF" => Op::If,
            "OP_ELSE" => Op::Else,
            "OP_ENDIF" => Op::EndIf,
            "OP_CHECKSIG" => Op::CheckSig,
            "OP_CHECKSEQUENCEVERIFY" => Op::CheckSequenceVerify,
            "OP_DROP" => Op::Drop,
            "OP_VERIFY" => Op::Verify,
            "OP_0" => Op::Push0,
            "OP_1" => Op::Push1,
            other => {
                let hexpart = other
                    .strip_prefix("0x")
                    .ok_or_else(|| ScriptParseError(other.to_string()))?;
                let bytes =
                    hex::decode(hexpart).map_err(|_| ScriptParseError(other.to_string()))?;
                Op::Push(bytes)
            }
        };
        ops.push(op);
    }
    Ok(ScriptProgram::new(ops))
}

/// Ordered input data, pushed bottom-to-top before the program runs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WitnessStack {
    pub items: Vec<Vec<u8>>,
}

impl WitnessStack {
    pub fn new(items: Vec<Vec<u8>>) -> WitnessStack {
        WitnessStack { items }
    }
}

/// Everything the VM needs beyond the script and witness. `signer` is the
/// identity of the transaction creator whose signature tokens the witness may
/// carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecContext {
    pub init_height: u64,
    pub at_height: u64,
    pub signer: PartyId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Failure {
    StackUnderflow,
    UnbalancedConditional,
    VerifyFailed,
    BadNumber,
    TimeLocked { needed: u64 },
    EmptyFinalStack,
    ExtraStackItems { depth: usize },
    FalseFinalStack,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub accepted: bool,
    pub failure: Option<Failure>,
}

impl ExecOutcome {
    fn ok() -> ExecOutcome {
        ExecOutcome {
            accepted: true,
            failure: None,
        }
    }

    fn fail(f: Failure) -> ExecOutcome {
        ExecOutcome {
            accepted: false,
            failure: Some(f),
        }
    }
}

fn truthy(bytes: &[u8]) -> bool {
    for (i, &b) in bytes.iter().enumerate() {
        if b != 0 {
            // negative zero counts as false
            return !(i == bytes.len() - 1 && b == 0x80);
        }
    }
    false
}

fn bool_bytes(b: bool) -> Vec<u8> {
    if b {
        vec![1]
    } else {
        vec![]
    }
}

/// Runs witness-then-program and applies the final-stack rule: accepted iff
/// exactly one truthy element remains.
pub fn exec(
    script: &ScriptProgram,
    witness: &WitnessStack,
    ctx: ExecContext,
    hasher: &Hasher,
) -> ExecOutcome {
    let mut stack: Vec<Vec<u8>> = witness.items.clone();
    let mut branches: Vec<bool> = Vec::new();

    for op in &script.ops {
        let executing = branches.iter().all(|&b| b);
        match op {
            Op::If => {
                if executing {
                    let Some(top) = stack.pop() else {
                        return ExecOutcome::fail(Failure::StackUnderflow);
                    };
                    branches.push(truthy(&top));
                } else {
                    branches.push(false);
                }
            }
            Op::Else => {
                let Some(top) = branches.last_mut() else {
                    return ExecOutcome::fail(Failure::UnbalancedConditional);
                };
                *top = !*top;
            }
            Op::EndIf => {
                if branches.pop().is_none() {
                    return ExecOutcome::fail(Failure::UnbalancedConditional);
                }
            }
            _ if !executing => {}
            Op::Hash160 => {
                let Some(top) = stack.pop() else {
                    return ExecOutcome::fail(Failure::StackUnderflow);
                };
                stack.push(hasher.digest(&top).0);
            }
            Op::Equal => {
                let (Some(a), Some(b)) = (stack.pop(), stack.pop()) else {
                    return ExecOutcome::fail(Failure::StackUnderflow);
                };
                stack.push(bool_bytes(a == b));
            }
            Op::Swap => {
                let n = stack.len();
                if n < 2 {
                    return ExecOutcome::fail(Failure::StackUnderflow);
                }
                stack.swap(n - 1, n - 2);
            }
            Op::CheckSig => {
                let (Some(pk), Some(sig)) = (stack.pop(), stack.pop()) else {
                    return ExecOutcome::fail(Failure::StackUnderflow);
                };
                let ok = pk.first() == Some(&PK_TAG)
                    && sig.first() == Some(&SIG_TAG)
                    && pk[1..] == sig[1..];
                stack.push(bool_bytes(ok));
            }
            Op::CheckSequenceVerify => {
                let Some(top) = stack.last() else {
                    return ExecOutcome::fail(Failure::StackUnderflow);
                };
                let Some(delta) = decode_num(top) else {
                    return ExecOutcome::fail(Failure::BadNumber);
                };
                let needed = ctx.init_height + delta;
                if ctx.at_height < needed {
                    return ExecOutcome::fail(Failure::TimeLocked { needed });
                }
            }
            Op::Drop => {
                if stack.pop().is_none() {
                    return ExecOutcome::fail(Failure::StackUnderflow);
                }
            }
            Op::Verify => {
                let Some(top) = stack.pop() else {
                    return ExecOutcome::fail(Failure::StackUnderflow);
                };
                if !truthy(&top) {
                    return ExecOutcome::fail(Failure::VerifyFailed);
                }
            }
            Op::Push0 => stack.push(vec![]),
            Op::Push1 => stack.push(vec![1]),
            Op::Push(v) => stack.push(v.clone()),
        }
    }

    if !branches.is_empty() {
        return ExecOutcome::fail(Failure::UnbalancedConditional);
    }
    match stack.len() {
        0 => ExecOutcome::fail(Failure::EmptyFinalStack),
        1 if truthy(&stack[0]) => ExecOutcome::ok(),
        1 => ExecOutcome::fail(Failure::FalseFinalStack),
        depth => ExecOutcome::fail(Failure::ExtraStackItems { depth }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BuiltinName {
    #[serde(rename = "mh-dep")]
    MhDep,
    #[serde(rename = "mh-col")]
    MhCol,
    #[serde(rename = "htlc")]
    Htlc,
}

impl BuiltinName {
    pub const ALL: [BuiltinName; 3] = [BuiltinName::MhDep, BuiltinName::MhCol, BuiltinName::Htlc];

    pub fn path_count(self) -> u8 {
        match self {
            BuiltinName::MhDep => 3,
            BuiltinName::MhCol | BuiltinName::Htlc => 2,
        }
    }

    pub fn parse(s: &str) -> Option<BuiltinName> {
        match s {
            "mh-dep" => Some(BuiltinName::MhDep),
            "mh-col" => Some(BuiltinName::MhCol),
            "htlc" => Some(BuiltinName::Htlc),
            _ => None,
        }
    }
}

impl fmt::Display for BuiltinName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinName::MhDep => f.write_str("mh-dep"),
            BuiltinName::MhCol => f.write_str("mh-col"),
            BuiltinName::Htlc => f.write_str("htlc"),
        }
    }
}

/// Parameters shared by the builtin programs.
#[derive(Debug, Clone)]
pub struct BuiltinParams {
    pub pk_a: PartyId,
    pub pk_b: PartyId,
    pub timeout: u64,
    pub dig_a: Digest,
    pub dig_b: Digest,
}

/// Returns the contract program for `name` with parameters substituted.
pub fn builtin(name: BuiltinName, p: &BuiltinParams) -> ScriptProgram {
    let t = Op::Push(encode_num(p.timeout));
    let dig_a = Op::Push(p.dig_a.0.clone());
    let dig_b = Op::Push(p.dig_b.0.clone());
    let pk_a = Op::Push(pk_bytes(p.pk_a));
    let pk_b = Op::Push(pk_bytes(p.pk_b));
    let ops = match name {
        BuiltinName::MhDep => vec![
            Op::Hash160,
            dig_a,
            Op::Equal,
            Op::Swap,
            Op::Hash160,
            dig_b,
            Op::Equal,
            Op::If,
            Op::If,
            Op::Push1,
            Op::Else,
            t,
            Op::CheckSequenceVerify,
            Op::Drop,
            pk_b,
            Op::CheckSig,
            Op::EndIf,
            Op::Else,
            Op::Verify,
            pk_a,
            Op::CheckSig,
            Op::EndIf,
        ],
        BuiltinName::MhCol => vec![
            t,
            Op::CheckSequenceVerify,
            Op::Drop,
            Op::Hash160,
            dig_a,
            Op::Equal,
            Op::If,
            Op::Hash160,
            dig_b,
            Op::Equal,
            Op::Else,
            pk_b,
            Op::CheckSig,
            Op::EndIf,
        ],
        BuiltinName::Htlc => vec![
            Op::Hash160,
            dig_a,
            Op::Equal,
            Op::If,
            pk_a,
            Op::Else,
            t,
            Op::CheckSequenceVerify,
            Op::Drop,
            pk_b,
            Op::EndIf,
            Op::CheckSig,
        ],
    };
    ScriptProgram::new(ops)
}

/// The preimages a witness builder has available.
#[derive(Debug, Clone, Default)]
pub struct SecretStore {
    pub pre_a: Option<Preimage>,
    pub pre_b: Option<Preimage>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    #[error("missing secret: preimage for slot {0}")]
    MissingSecret(u8),
    #[error("builtin {0} has no redeem path {1}")]
    BadPath(BuiltinName, u8),
}

/// Builds the input-data row for `(name, path)`. Paths are 1-based, matching
/// the listed redeem-path tables.
pub fn witness_for(
    name: BuiltinName,
    path: u8,
    secrets: &SecretStore,
    signer: PartyId,
) -> Result<WitnessStack, WitnessError> {
    let pre_a = || {
        secrets
            .pre_a
            .as_ref()
            .map(|p| p.0.clone())
            .ok_or(WitnessError::MissingSecret(1))
    };
    let pre_b = || {
        secrets
            .pre_b
            .as_ref()
            .map(|p| p.0.clone())
            .ok_or(WitnessError::MissingSecret(2))
    };
    let sig = sig_bytes(signer);
    let items = match (name, path) {
        (BuiltinName::MhDep, 1) => vec![sig, vec![], pre_a()?],
        (BuiltinName::MhDep, 2) => vec![sig, pre_b()?, vec![]],
        (BuiltinName::MhDep, 3) => vec![pre_b()?, pre_a()?],
        (BuiltinName::MhCol, 1) => vec![sig, vec![]],
        (BuiltinName::MhCol, 2) => vec![pre_b()?, pre_a()?],
        (BuiltinName::Htlc, 1) => vec![sig, pre_a()?],
        (BuiltinName::Htlc, 2) => vec![sig, vec![]],
        _ => return Err(WitnessError::BadPath(name, path)),
    };
    Ok(WitnessStack::new(items))
}

/// Maps a builtin's 1-based path index to the predicate-tree path name.
pub fn redeem_path_of(name: BuiltinName, path: u8) -> Option<RedeemPath> {
    match (name, path) {
        (BuiltinName::MhDep, 1) => Some(RedeemPath::DepA),
        (BuiltinName::MhDep, 2) => Some(RedeemPath::DepB),
        (BuiltinName::MhDep, 3) => Some(RedeemPath::DepM),
        (BuiltinName::MhCol, 1) => Some(RedeemPath::ColB),
        (BuiltinName::MhCol, 2) => Some(RedeemPath::ColM),
        (BuiltinName::Htlc, 1) => Some(RedeemPath::HtlcA),
        (BuiltinName::Htlc, 2) => Some(RedeemPath::HtlcB),
        _ => None,
    }
}

/// Which preimage slots a path's witness row carries.
fn slots_of(name: BuiltinName, path: u8) -> (bool, bool) {
    match (name, path) {
        (BuiltinName::MhDep, 1) => (true, false),
        (BuiltinName::MhDep, 2) => (false, true),
        (BuiltinName::MhDep, 3) => (true, true),
        (BuiltinName::MhCol, 1) => (false, false),
        (BuiltinName::MhCol, 2) => (true, true),
        (BuiltinName::Htlc, 1) => (true, false),
        (BuiltinName::Htlc, 2) => (false, false),
        _ => unreachable!("callers validate the path index"),
    }
}

/// The predicate tree matching a builtin program, for differential testing.
pub fn oracle_ast(name: BuiltinName, p: &BuiltinParams) -> PredicateAst {
    match name {
        BuiltinName::MhDep => contracts::make_mh_dep(
            p.pk_a,
            p.pk_b,
            p.timeout,
            p.dig_a.clone(),
            p.dig_b.clone(),
        )
        .expect("harness parameters are valid"),
        BuiltinName::MhCol => {
            contracts::make_mh_col(p.pk_b, p.timeout, p.dig_a.clone(), p.dig_b.clone())
                .expect("harness parameters are valid")
        }
        BuiltinName::Htlc => contracts::make_htlc(p.pk_a, p.pk_b, p.timeout, p.dig_a.clone())
            .expect("harness parameters are valid"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub builtin: BuiltinName,
    pub path: u8,
    pub signer: String,
    pub has_a: bool,
    pub has_b: bool,
    pub height_delta: i64,
    pub vm: bool,
    pub oracle: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DifferentialReport {
    pub builtin: BuiltinName,
    pub trials: u64,
    pub counterexamples: Vec<Counterexample>,
}

/// Runs `trials` random `(path, signer, secret-subset, height)` tuples through
/// both the VM and the predicate evaluator and reports any disagreement.
/// Parties lacking a secret present a random wrong preimage in its place.
pub fn differential_check<R: Rng + ?Sized>(
    name: BuiltinName,
    trials: u64,
    rng: &mut R,
    hasher: &Hasher,
) -> DifferentialReport {
    let mut report = DifferentialReport {
        builtin: name,
        trials,
        counterexamples: Vec::new(),
    };
    for _ in 0..trials {
        let outcome = differential_trial(name, None, rng, hasher);
        if let Err(cx) = outcome {
            report.counterexamples.push(cx);
        }
    }
    report
}

/// Like [`differential_check`] but executes a caller-transformed program in
/// place of the builtin, for mutation testing. The oracle side still uses the
/// uncorrupted contract.
pub fn differential_check_against<R, F>(
    name: BuiltinName,
    trials: u64,
    rng: &mut R,
    hasher: &Hasher,
    mutate: F,
) -> DifferentialReport
where
    R: Rng + ?Sized,
    F: Fn(ScriptProgram) -> ScriptProgram,
{
    let mut report = DifferentialReport {
        builtin: name,
        trials,
        counterexamples: Vec::new(),
    };
    for _ in 0..trials {
        if let Err(cx) = differential_trial(name, Some(&mutate), rng, hasher) {
            report.counterexamples.push(cx);
        }
    }
    report
}

#[allow(clippy::type_complexity)]
fn differential_trial<R: Rng + ?Sized>(
    name: BuiltinName,
    mutate: Option<&dyn Fn(ScriptProgram) -> ScriptProgram>,
    rng: &mut R,
    hasher: &Hasher,
) -> Result<(), Counterexample> {
    let mu = hasher.mu_bits();
    let pre_a = Preimage::random(rng, mu);
    let pre_b = Preimage::random(rng, mu);
    let params = BuiltinParams {
        pk_a: PartyId::Alice,
        pk_b: PartyId::Bob,
        timeout: rng.gen_range(1..=6),
        dig_a: hasher.digest_preimage(&pre_a),
        dig_b: hasher.digest_preimage(&pre_b),
    };
    let mut program = builtin(name, &params);
    if let Some(m) = mutate {
        program = m(program);
    }
    let ast = oracle_ast(name, &params);

    let path = rng.gen_range(1..=name.path_count());
    let signer = [PartyId::Alice, PartyId::Bob, PartyId::Miner(1)][rng.gen_range(0..3)];
    let has_a = rng.gen_bool(0.5);
    let has_b = rng.gen_bool(0.5);
    let init_height = 10u64;
    let delta = rng.gen_range(0..=(2 * params.timeout)) as i64;
    let at_height = init_height + delta as u64;

    // A party without a secret presents a random wrong preimage instead.
    let claim_a = if has_a {
        pre_a.clone()
    } else {
        Preimage::random(rng, mu)
    };
    let claim_b = if has_b {
        pre_b.clone()
    } else {
        Preimage::random(rng, mu)
    };
    let secrets = SecretStore {
        pre_a: Some(claim_a.clone()),
        pre_b: Some(claim_b.clone()),
    };
    let witness = witness_for(name, path, &secrets, signer).expect("all secrets present");
    let ctx = ExecContext {
        init_height,
        at_height,
        signer,
    };
    let vm = exec(&program, &witness, ctx, hasher).accepted;

    let (use_a, use_b) = slots_of(name, path);
    let rw = RedeemWitness::new(
        redeem_path_of(name, path).expect("path index validated"),
        use_a.then_some(claim_a),
        use_b.then_some(claim_b),
        signer,
    );
    let oracle =
        contracts::evaluate(&ast, &rw, hasher, Some(init_height), at_height).expect("path exists");

    if vm == oracle {
        Ok(())
    } else {
        Err(Counterexample {
            builtin: name,
            path,
            signer: signer.to_string(),
            has_a,
            has_b,
            height_delta: delta,
            vm,
            oracle,
        })
    }
}
