//! The abstract blockchain: contracts, transactions, mempool, and round-based
//! block creation with exactly one transaction per block.
//!
//! Ledger state is a value; all mutation flows through [`World::advance_round`]
//! on a single logical owner. Independent simulations with distinct seeds can
//! run in parallel without shared mutable state.

use crate::contracts::{self, PathEval, PredicateAst, RedeemPath, RedeemWitness};
use crate::rational::Ratio;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A discrete, non-negative token quantity. All arithmetic is exact; there is
/// no floating point anywhere in the ledger.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TokenAmount(pub u64);

impl TokenAmount {
    pub const ZERO: TokenAmount = TokenAmount(0);

    pub fn checked_add(self, other: TokenAmount) -> Option<TokenAmount> {
        self.0.checked_add(other.0).map(TokenAmount)
    }

    pub fn checked_sub(self, other: TokenAmount) -> Option<TokenAmount> {
        self.0.checked_sub(other.0).map(TokenAmount)
    }

    pub fn as_ratio(self) -> Ratio {
        Ratio::from_integer(BigInt::from(self.0))
    }
}

impl fmt::Display for TokenAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// System participants. Miner indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartyId {
    Alice,
    Bob,
    Miner(u32),
    External,
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyId::Alice => write!(f, "alice"),
            PartyId::Bob => write!(f, "bob"),
            PartyId::Miner(i) => write!(f, "miner-{i}"),
            PartyId::External => write!(f, "external"),
        }
    }
}

impl Serialize for PartyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PartyId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match text.as_str() {
            "alice" => Ok(PartyId::Alice),
            "bob" => Ok(PartyId::Bob),
            "external" => Ok(PartyId::External),
            other => other
                .strip_prefix("miner-")
                .and_then(|n| n.parse().ok())
                .map(PartyId::Miner)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown party {text:?}"))),
        }
    }
}

/// A hash preimage: a byte string of the configured security-parameter width.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Preimage(pub Vec<u8>);

impl Preimage {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, mu_bits: u32) -> Preimage {
        let mut bytes = vec![0u8; (mu_bits as usize).div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        Preimage(bytes)
    }
}

/// A hash digest of fixed length, opaque to the analysis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub Vec<u8>);

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(&self.0))
    }
}

/// Hash backend. Digests are opaque, so any preimage-resistant function works;
/// the default truncates SHA-256 to the configured security parameter. The
/// `Hash160` mode switches to the RIPEMD160∘SHA256 composition used by the
/// script layer of real deployments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashSpec {
    TruncatedSha256 { mu_bits: u32 },
    Hash160,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hasher {
    spec: HashSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("security parameter must be a positive multiple of 8 bits, got {0}")]
    BadSecurityParameter(u32),
    #[error("base fee must be at least one token quantum")]
    ZeroBaseFee,
    #[error("mining powers must be positive and sum to 1 (got sum {0})")]
    BadPowerSum(String),
    #[error("population must not be empty")]
    EmptyPopulation,
    #[error("population denominators too fine to sample exactly")]
    PowerPrecision,
}

impl Hasher {
    pub const DEFAULT_MU_BITS: u32 = 256;

    pub fn new(spec: HashSpec) -> Result<Hasher, ConfigError> {
        if let HashSpec::TruncatedSha256 { mu_bits } = spec {
            if mu_bits == 0 || mu_bits % 8 != 0 || mu_bits > 256 {
                return Err(ConfigError::BadSecurityParameter(mu_bits));
            }
        }
        Ok(Hasher { spec })
    }

    pub fn digest(&self, data: &[u8]) -> Digest {
        use sha2::Digest as _;
        match self.spec {
            HashSpec::TruncatedSha256 { mu_bits } => {
                let full = sha2::Sha256::digest(data);
                Digest(full[..(mu_bits as usize) / 8].to_vec())
            }
            HashSpec::Hash160 => {
                use ripemd::Ripemd160;
                let sha = sha2::Sha256::digest(data);
                let rip = Ripemd160::digest(sha);
                Digest(rip.to_vec())
            }
        }
    }

    pub fn digest_preimage(&self, pre: &Preimage) -> Digest {
        self.digest(&pre.0)
    }

    pub fn mu_bits(&self) -> u32 {
        match self.spec {
            HashSpec::TruncatedSha256 { mu_bits } => mu_bits,
            HashSpec::Hash160 => 160,
        }
    }
}

impl Default for Hasher {
    fn default() -> Self {
        Hasher::new(HashSpec::TruncatedSha256 {
            mu_bits: Hasher::DEFAULT_MU_BITS,
        })
        .expect("default parameters are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContractId(pub String);

impl ContractId {
    pub fn new(s: impl Into<String>) -> ContractId {
        ContractId(s.into())
    }
}

impl fmt::Display for ContractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TxId(pub String);

impl TxId {
    pub fn new(s: impl Into<String>) -> TxId {
        TxId(s.into())
    }
}

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A token amount locked under a predicate. A contract is redeemable at most
/// once; the redeemed flag lives in [`World`] and never flips back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub id: ContractId,
    pub amount: TokenAmount,
    pub predicate: PredicateAst,
    /// Height of the confirming block, or `None` while unconfirmed.
    pub init_height: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error("contract amount must be positive")]
    ZeroAmount,
}

impl Contract {
    pub fn new(
        id: ContractId,
        amount: TokenAmount,
        predicate: PredicateAst,
    ) -> Result<Contract, ContractError> {
        if amount == TokenAmount::ZERO {
            return Err(ContractError::ZeroAmount);
        }
        Ok(Contract {
            id,
            amount,
            predicate,
            init_height: None,
        })
    }

    /// A plain payout: spendable by `owner`'s signature alone.
    pub fn payout(id: ContractId, owner: PartyId, amount: TokenAmount) -> Contract {
        Contract {
            id,
            amount,
            predicate: PredicateAst::ownership(owner),
            init_height: None,
        }
    }

    /// An externally funded contract with a vacuous (always-true) predicate,
    /// used as the input of unrelated base-fee transactions.
    pub fn external(id: ContractId, amount: TokenAmount) -> Contract {
        Contract {
            id,
            amount,
            predicate: PredicateAst::vacuous(),
            init_height: None,
        }
    }
}

/// Reassigns tokens from input contracts to output contracts; the difference
/// is the fee, set by the creator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub id: TxId,
    pub creator: PartyId,
    pub inputs: Vec<(ContractId, RedeemWitness)>,
    pub outputs: Vec<Contract>,
    pub fee: TokenAmount,
}

/// One slot in the chain. Exactly zero or one transaction per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    pub miner: PartyId,
    pub tx: Option<Transaction>,
}

/// Ordered blocks with consecutive heights starting at 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Chain {
    pub blocks: Vec<Block>,
}

impl Chain {
    pub fn next_height(&self) -> u64 {
        self.blocks.len() as u64 + 1
    }
}

/// Relative block-creation rates λ_1..λ_n, positive and summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinerPopulation {
    powers: Vec<Ratio>,
    /// Integer weights over a common denominator, for exact sampling.
    cumulative: Vec<u128>,
    total: u128,
}

impl MinerPopulation {
    pub fn new(powers: Vec<Ratio>) -> Result<MinerPopulation, ConfigError> {
        if powers.is_empty() {
            return Err(ConfigError::EmptyPopulation);
        }
        let sum: Ratio = powers.iter().sum();
        if !sum.is_one() || powers.iter().any(|p| !p.is_positive()) {
            return Err(ConfigError::BadPowerSum(sum.to_string()));
        }
        let mut denom = BigInt::one();
        for p in &powers {
            denom = denom.lcm(p.denom());
        }
        let total = denom.to_u128().ok_or(ConfigError::PowerPrecision)?;
        let mut cumulative = Vec::with_capacity(powers.len());
        let mut acc: u128 = 0;
        for p in &powers {
            let w = (p * Ratio::from_integer(denom.clone()))
                .to_integer()
                .to_u128()
                .ok_or(ConfigError::PowerPrecision)?;
            acc += w;
            cumulative.push(acc);
        }
        debug_assert_eq!(acc, total);
        Ok(MinerPopulation {
            powers,
            cumulative,
            total,
        })
    }

    pub fn from_strs(texts: &[&str]) -> Result<MinerPopulation, ConfigError> {
        let powers = texts
            .iter()
            .map(|t| crate::rational::parse_ratio(t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::BadPowerSum(e.to_string()))?;
        MinerPopulation::new(powers)
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn power(&self, i: usize) -> &Ratio {
        &self.powers[i]
    }

    pub fn powers(&self) -> &[Ratio] {
        &self.powers
    }

    pub fn lambda_min(&self) -> &Ratio {
        self.powers.iter().min().expect("population is non-empty")
    }

    /// Draws a 0-based miner index with probability proportional to power.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r = rng.gen_range(0..self.total);
        self.cumulative.partition_point(|&c| c <= r)
    }
}

/// Why a transaction cannot be confirmed, or `Valid` when it can.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidityVerdict {
    Valid,
    /// An input was already redeemed by the named confirmed transaction.
    Conflicting(TxId),
    /// An input predicate evaluates false for non-temporal reasons.
    PredicateFalse(RedeemPath),
    /// Every non-temporal condition holds; becomes valid at the given height.
    TimeLocked(u64),
    /// Output amounts (plus fee) exceed input amounts, or amounts mismatch.
    Overspend,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("unknown contract {0}")]
    UnknownContract(ContractId),
    #[error("unknown transaction {0}")]
    UnknownTransaction(TxId),
    #[error("duplicate transaction id {0}")]
    DuplicateTransaction(TxId),
    #[error("duplicate contract id {0}")]
    DuplicateContract(ContractId),
    #[error("predicate evaluation failed: {0}")]
    Eval(#[from] contracts::EvalError),
    #[error("policy selected an unconfirmable transaction: {0:?}")]
    InvalidSelection(ValidityVerdict),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone)]
struct ContractEntry {
    contract: Contract,
    redeemed_by: Option<TxId>,
}

/// What a selection policy tells the drawn miner to do.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// Include a previously published mempool transaction.
    FromMempool(TxId),
    /// Include a transaction the miner creates herself (e.g. a seizure).
    SelfCreate(Transaction),
    /// Leave the block empty. Trivially dominated; kept for completeness.
    Empty,
}

/// Report for one completed round.
#[derive(Debug, Clone, Serialize)]
pub struct RoundOutcome {
    pub height: u64,
    pub miner: PartyId,
    pub tx_id: Option<TxId>,
    pub fee: TokenAmount,
    pub redeemed_contracts: Vec<ContractId>,
}

/// The full mutable ledger: chain, contract set, mempool, balances, and the
/// globally known preimages.
#[derive(Debug, Clone)]
pub struct World {
    pub hasher: Hasher,
    pub chain: Chain,
    contracts: BTreeMap<ContractId, ContractEntry>,
    mempool: BTreeMap<TxId, Transaction>,
    balances: BTreeMap<PartyId, TokenAmount>,
    revealed: BTreeMap<Digest, Preimage>,
}

impl World {
    pub fn new(hasher: Hasher) -> World {
        World {
            hasher,
            chain: Chain::default(),
            contracts: BTreeMap::new(),
            mempool: BTreeMap::new(),
            balances: BTreeMap::new(),
            revealed: BTreeMap::new(),
        }
    }

    /// Places a contract directly into the confirmed state, as if its
    /// initiating transaction were included in block `init_height`.
    pub fn install_contract(
        &mut self,
        mut contract: Contract,
        init_height: u64,
    ) -> Result<(), LedgerError> {
        if self.contracts.contains_key(&contract.id) {
            return Err(LedgerError::DuplicateContract(contract.id));
        }
        contract.init_height = Some(init_height);
        self.contracts.insert(
            contract.id.clone(),
            ContractEntry {
                contract,
                redeemed_by: None,
            },
        );
        Ok(())
    }

    pub fn contract(&self, id: &ContractId) -> Option<&Contract> {
        self.contracts.get(id).map(|e| &e.contract)
    }

    pub fn is_redeemed(&self, id: &ContractId) -> bool {
        self.contracts
            .get(id)
            .is_some_and(|e| e.redeemed_by.is_some())
    }

    pub fn balance(&self, party: PartyId) -> TokenAmount {
        self.balances.get(&party).copied().unwrap_or(TokenAmount::ZERO)
    }

    /// Total amount of unredeemed pure-payout contracts owned by `party`.
    pub fn payout_total(&self, party: PartyId) -> TokenAmount {
        let mut sum = 0u64;
        for entry in self.contracts.values() {
            if entry.redeemed_by.is_none() && entry.contract.predicate.is_ownership_of(party) {
                sum += entry.contract.amount.0;
            }
        }
        TokenAmount(sum)
    }

    /// Σ balances + Σ unredeemed contract amounts. Constant across
    /// [`World::advance_round`].
    pub fn conserved_total(&self) -> u128 {
        let bal: u128 = self.balances.values().map(|b| b.0 as u128).sum();
        let locked: u128 = self
            .contracts
            .values()
            .filter(|e| e.redeemed_by.is_none())
            .map(|e| e.contract.amount.0 as u128)
            .sum();
        bal + locked
    }

    pub fn mempool_ids(&self) -> impl Iterator<Item = &TxId> {
        self.mempool.keys()
    }

    pub fn mempool_tx(&self, id: &TxId) -> Option<&Transaction> {
        self.mempool.get(id)
    }

    pub fn revealed_preimages(&self) -> &BTreeMap<Digest, Preimage> {
        &self.revealed
    }

    pub fn knows_preimage(&self, digest: &Digest) -> bool {
        self.revealed.contains_key(digest)
    }

    /// Publishes a transaction to the mempool. Publication makes every
    /// digest-matching preimage in its witnesses globally known; knowledge
    /// never decreases.
    pub fn publish(&mut self, tx: Transaction) -> Result<(), LedgerError> {
        if self.mempool.contains_key(&tx.id) {
            return Err(LedgerError::DuplicateTransaction(tx.id));
        }
        self.reveal_from_witnesses(&tx);
        self.mempool.insert(tx.id.clone(), tx);
        Ok(())
    }

    fn reveal_from_witnesses(&mut self, tx: &Transaction) {
        for (cid, witness) in &tx.inputs {
            let Some(entry) = self.contracts.get(cid) else {
                continue;
            };
            let digests = entry.contract.predicate.preimage_digests();
            let mut reveal = |pre: &Option<Preimage>| {
                if let Some(pre) = pre {
                    let d = self.hasher.digest_preimage(pre);
                    if digests.contains(&d) {
                        self.revealed.entry(d).or_insert_with(|| pre.clone());
                    }
                }
            };
            reveal(&witness.pre1);
            reveal(&witness.pre2);
        }
    }

    /// Checks whether `tx` could be confirmed in a block at `at_height`.
    pub fn validate_transaction(
        &self,
        tx: &Transaction,
        at_height: u64,
    ) -> Result<ValidityVerdict, LedgerError> {
        let mut input_sum: u128 = 0;
        let mut locked_until: Option<u64> = None;
        for (cid, witness) in &tx.inputs {
            let entry = self
                .contracts
                .get(cid)
                .ok_or_else(|| LedgerError::UnknownContract(cid.clone()))?;
            if let Some(spender) = &entry.redeemed_by {
                return Ok(ValidityVerdict::Conflicting(spender.clone()));
            }
            input_sum += entry.contract.amount.0 as u128;
            let eval = contracts::evaluate_detailed(
                &entry.contract.predicate,
                witness,
                &self.hasher,
                entry.contract.init_height,
                at_height,
            )?;
            match eval {
                PathEval::Satisfied => {}
                PathEval::TimeLocked { earliest } => {
                    locked_until = Some(locked_until.map_or(earliest, |c| c.max(earliest)));
                }
                PathEval::Unsatisfied => {
                    return Ok(ValidityVerdict::PredicateFalse(witness.path));
                }
            }
        }
        let output_sum: u128 = tx.outputs.iter().map(|c| c.amount.0 as u128).sum();
        if output_sum + tx.fee.0 as u128 != input_sum {
            return Ok(ValidityVerdict::Overspend);
        }
        if let Some(earliest) = locked_until {
            return Ok(ValidityVerdict::TimeLocked(earliest));
        }
        Ok(ValidityVerdict::Valid)
    }

    /// Runs one round: draws a miner proportionally to power, asks the
    /// selection policy for a transaction, appends the block, and settles
    /// token movements. `select` receives the drawn miner's 0-based index.
    pub fn advance_round<R, F>(
        &mut self,
        population: &MinerPopulation,
        mut select: F,
        rng: &mut R,
    ) -> Result<RoundOutcome, LedgerError>
    where
        R: Rng + ?Sized,
        F: FnMut(usize, &World, u64) -> Selection,
    {
        let height = self.chain.next_height();
        let miner_idx = population.sample(rng);
        let miner = PartyId::Miner(miner_idx as u32 + 1);
        let selection = select(miner_idx, self, height);

        let tx = match selection {
            Selection::Empty => None,
            Selection::FromMempool(id) => {
                let tx = self
                    .mempool
                    .get(&id)
                    .cloned()
                    .ok_or(LedgerError::UnknownTransaction(id))?;
                Some(tx)
            }
            Selection::SelfCreate(tx) => {
                // Self-created transactions pass through the mempool like any
                // other publication, revealing their preimages.
                self.publish(tx.clone())?;
                Some(tx)
            }
        };

        let mut outcome = RoundOutcome {
            height,
            miner,
            tx_id: None,
            fee: TokenAmount::ZERO,
            redeemed_contracts: Vec::new(),
        };

        if let Some(tx) = &tx {
            match self.validate_transaction(tx, height)? {
                ValidityVerdict::Valid => {}
                bad => return Err(LedgerError::InvalidSelection(bad)),
            }
            for (cid, _) in &tx.inputs {
                let entry = self.contracts.get_mut(cid).expect("validated above");
                entry.redeemed_by = Some(tx.id.clone());
                outcome.redeemed_contracts.push(cid.clone());
            }
            for out in &tx.outputs {
                let mut out = out.clone();
                out.init_height = Some(height);
                if self.contracts.contains_key(&out.id) {
                    return Err(LedgerError::DuplicateContract(out.id));
                }
                self.contracts.insert(
                    out.id.clone(),
                    ContractEntry {
                        contract: out,
                        redeemed_by: None,
                    },
                );
            }
            let bal = self.balances.entry(miner).or_insert(TokenAmount::ZERO);
            *bal = bal
                .checked_add(tx.fee)
                .expect("fee sums stay within u64 in modeled scenarios");
            self.mempool.remove(&tx.id);
            outcome.tx_id = Some(tx.id.clone());
            outcome.fee = tx.fee;
        }

        self.chain.blocks.push(Block {
            height,
            miner,
            tx,
        });
        Ok(outcome)
    }
}

/// Produces fresh unrelated transactions offering exactly the base fee. The
/// mempool always holds at least one of these; they never conflict with the
/// contracts under study.
#[derive(Debug, Clone)]
pub struct UnrelatedTxStream {
    base_fee: TokenAmount,
    counter: u64,
}

impl UnrelatedTxStream {
    pub fn new(base_fee: TokenAmount) -> Result<UnrelatedTxStream, ConfigError> {
        if base_fee == TokenAmount::ZERO {
            return Err(ConfigError::ZeroBaseFee);
        }
        Ok(UnrelatedTxStream {
            base_fee,
            counter: 0,
        })
    }

    pub fn base_fee(&self) -> TokenAmount {
        self.base_fee
    }

    /// Installs a fresh externally funded contract and publishes a
    /// transaction spending it entirely as fee.
    pub fn publish_next(&mut self, world: &mut World) -> Result<TxId, LedgerError> {
        self.counter += 1;
        let cid = ContractId::new(format!("ext-{}", self.counter));
        let txid = TxId::new(format!("unrelated-{}", self.counter));
        world.install_contract(
            Contract::external(cid.clone(), self.base_fee),
            world.chain.next_height().saturating_sub(1),
        )?;
        let tx = Transaction {
            id: txid.clone(),
            creator: PartyId::External,
            inputs: vec![(cid, RedeemWitness::vacuous())],
            outputs: vec![],
            fee: self.base_fee,
        };
        world.publish(tx)?;
        Ok(txid)
    }
}

/// The myopic policy: include the highest-fee transaction confirmable in the
/// next block. Equal fees break lexicographically by transaction id.
pub fn myopic_selection(world: &World, at_height: u64) -> Selection {
    let mut best: Option<(&TxId, TokenAmount)> = None;
    for (id, tx) in &world.mempool {
        if world.validate_transaction(tx, at_height) != Ok(ValidityVerdict::Valid) {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, fee)) => tx.fee > fee,
        };
        if better {
            best = Some((id, tx.fee));
        }
    }
    match best {
        Some((id, _)) => Selection::FromMempool(id.clone()),
        None => Selection::Empty,
    }
}

/// One `trace-v1` record per round: `{height, miner, tx_id, fee,
/// redeemed_contracts}` as a JSON line.
pub const TRACE_SCHEMA: &str = "trace-v1";

pub fn trace_line(outcome: &RoundOutcome) -> String {
    serde_json::to_string(outcome).expect("round outcomes are serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::make_mh_dep;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn world() -> World {
        World::new(Hasher::default())
    }

    fn vacuous_contract(id: &str, amount: u64) -> Contract {
        Contract::external(ContractId::new(id), TokenAmount(amount))
    }

    fn spend(id: &str, cid: &str, fee: u64, outputs: Vec<Contract>) -> Transaction {
        Transaction {
            id: TxId::new(id),
            creator: PartyId::External,
            inputs: vec![(ContractId::new(cid), RedeemWitness::vacuous())],
            outputs,
            fee: TokenAmount(fee),
        }
    }

    #[test]
    fn vacuous_redeem_is_valid_at_any_height() {
        let mut w = world();
        w.install_contract(vacuous_contract("c", 5), 0).unwrap();
        let tx = spend("t", "c", 1, vec![vacuous_contract("c2", 4)]);
        assert_eq!(w.validate_transaction(&tx, 1), Ok(ValidityVerdict::Valid));
        assert_eq!(w.validate_transaction(&tx, 999), Ok(ValidityVerdict::Valid));
    }

    #[test]
    fn unknown_contract_is_an_error_not_a_verdict() {
        let w = world();
        let tx = spend("t", "missing", 1, vec![]);
        assert!(matches!(
            w.validate_transaction(&tx, 1),
            Err(LedgerError::UnknownContract(_))
        ));
    }

    #[test]
    fn amount_mismatch_is_overspend() {
        let mut w = world();
        w.install_contract(vacuous_contract("c", 5), 0).unwrap();
        let tx = spend("t", "c", 2, vec![vacuous_contract("c2", 4)]);
        assert_eq!(w.validate_transaction(&tx, 1), Ok(ValidityVerdict::Overspend));
    }

    #[test]
    fn dep_b_path_is_timelocked_before_timeout() {
        let mut w = world();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pre_a = Preimage::random(&mut rng, 256);
        let pre_b = Preimage::random(&mut rng, 256);
        let dig_a = w.hasher.digest_preimage(&pre_a);
        let dig_b = w.hasher.digest_preimage(&pre_b);
        let t = 5;
        let predicate =
            make_mh_dep(PartyId::Alice, PartyId::Bob, t, dig_a, dig_b).unwrap();
        let contract = Contract::new(ContractId::new("dep"), TokenAmount(100), predicate).unwrap();
        w.install_contract(contract, 3).unwrap();

        let tx = Transaction {
            id: TxId::new("txB-dep"),
            creator: PartyId::Bob,
            inputs: vec![(
                ContractId::new("dep"),
                RedeemWitness::new(RedeemPath::DepB, None, Some(pre_b), PartyId::Bob),
            )],
            outputs: vec![Contract::payout(
                ContractId::new("b-out"),
                PartyId::Bob,
                TokenAmount(98),
            )],
            fee: TokenAmount(2),
        };
        assert_eq!(
            w.validate_transaction(&tx, 3 + t - 1),
            Ok(ValidityVerdict::TimeLocked(3 + t))
        );
        assert_eq!(w.validate_transaction(&tx, 3 + t), Ok(ValidityVerdict::Valid));
    }

    #[test]
    fn second_spend_conflicts_after_confirmation() {
        let mut w = world();
        w.install_contract(vacuous_contract("c", 5), 0).unwrap();
        let tx1 = spend("t1", "c", 5, vec![]);
        let tx2 = spend("t2", "c", 5, vec![]);
        w.publish(tx1).unwrap();
        w.publish(tx2.clone()).unwrap();
        let pop = MinerPopulation::from_strs(&["1"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = w
            .advance_round(&pop, |_, w, h| myopic_selection(w, h), &mut rng)
            .unwrap();
        assert_eq!(out.tx_id, Some(TxId::new("t1")));
        assert_eq!(
            w.validate_transaction(&tx2, 2),
            Ok(ValidityVerdict::Conflicting(TxId::new("t1")))
        );
    }

    #[test]
    fn single_miner_earns_the_base_fee() {
        let mut w = world();
        let mut stream = UnrelatedTxStream::new(TokenAmount(3)).unwrap();
        stream.publish_next(&mut w).unwrap();
        let pop = MinerPopulation::from_strs(&["1"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = w
            .advance_round(&pop, |_, w, h| myopic_selection(w, h), &mut rng)
            .unwrap();
        assert_eq!(out.miner, PartyId::Miner(1));
        assert_eq!(out.fee, TokenAmount(3));
        assert_eq!(w.balance(PartyId::Miner(1)), TokenAmount(3));
    }

    #[test]
    fn unrelated_stream_never_conflicts() {
        let mut w = world();
        let mut stream = UnrelatedTxStream::new(TokenAmount(1)).unwrap();
        let a = stream.publish_next(&mut w).unwrap();
        let b = stream.publish_next(&mut w).unwrap();
        assert_ne!(a, b);
        let ta = w.mempool_tx(&a).unwrap().clone();
        let tb = w.mempool_tx(&b).unwrap().clone();
        assert_eq!(ta.fee, TokenAmount(1));
        assert_eq!(tb.fee, TokenAmount(1));
        assert_eq!(w.validate_transaction(&ta, 1), Ok(ValidityVerdict::Valid));
        assert_eq!(w.validate_transaction(&tb, 1), Ok(ValidityVerdict::Valid));
    }

    #[test]
    fn zero_base_fee_rejected() {
        assert!(UnrelatedTxStream::new(TokenAmount(0)).is_err());
    }

    #[test]
    fn replay_is_bit_identical() {
        let run = |seed: u64| {
            let mut w = world();
            let mut stream = UnrelatedTxStream::new(TokenAmount(1)).unwrap();
            let pop = MinerPopulation::from_strs(&["1/2", "1/2"]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut lines = Vec::new();
            for _ in 0..50 {
                stream.publish_next(&mut w).unwrap();
                let out = w
                    .advance_round(&pop, |_, w, h| myopic_selection(w, h), &mut rng)
                    .unwrap();
                lines.push(trace_line(&out));
            }
            lines
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn conservation_across_rounds() {
        let mut w = world();
        let mut stream = UnrelatedTxStream::new(TokenAmount(2)).unwrap();
        let pop = MinerPopulation::from_strs(&["7/10", "3/10"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            stream.publish_next(&mut w).unwrap();
            let before = w.conserved_total();
            w.advance_round(&pop, |_, w, h| myopic_selection(w, h), &mut rng)
                .unwrap();
            assert_eq!(w.conserved_total(), before);
        }
    }

    #[test]
    fn sampling_matches_powers_over_many_rounds() {
        // 10,000 seeded rounds with powers (0.7, 0.3): miner 1's block count
        // is binomial with n=10000, p=0.7, σ=√(np(1−p))≈45.8.
        let pop = MinerPopulation::from_strs(&["7/10", "3/10"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 10_000;
        let count = (0..n).filter(|_| pop.sample(&mut rng) == 0).count() as f64;
        let sigma = (n as f64 * 0.7 * 0.3).sqrt();
        assert!(
            (count - 7_000.0).abs() <= 3.0 * sigma,
            "count {count} outside 7000 ± {:.1}",
            3.0 * sigma
        );
    }

    #[test]
    fn population_validation() {
        assert!(MinerPopulation::from_strs(&[]).is_err());
        assert!(MinerPopulation::from_strs(&["1/2", "1/3"]).is_err());
        assert!(MinerPopulation::from_strs(&["3/2", "-1/2"]).is_err());
        assert!(MinerPopulation::from_strs(&["1/2", "1/2"]).is_ok());
    }
}
