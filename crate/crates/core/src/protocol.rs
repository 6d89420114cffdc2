//! The two-party contract protocol (setup, initiation, redeeming) and its
//! ideal-functionality reference model, executed in lockstep by a bounded
//! model checker.
//!
//! Both machines deliberately disregard timeouts and transaction conflicts;
//! the full semantics live in the ledger and game modules. Out-of-phase and
//! unknown messages are ignored, never errors.
//!
//! The ideal model is implemented literally from its transition formulas. The
//! mempool-projection machine mirrors the ideal model's revelation clauses
//! wherever a literal phase-by-phase reading would differ, so equivalence is
//! well-defined; each mirrored spot is surfaced as a flag in the equivalence
//! report rather than silently resolved:
//!
//! * the second party revealing the first preimage through an (invalid)
//!   first-path redeem attempt,
//! * the first party's both-preimage attempts not revealing her preimage,
//! * preimage sharing accepted after initiation.

use crate::contracts::{relaxed_predicate, RedeemPath};
use crate::ledger::{Hasher, PartyId, Preimage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// Environment-driven protocol actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    SetupB,
    SetupA,
    Share,
    Publish(PartyId),
    Init,
    Redeem(PartyId, RedeemPath),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::SetupB => f.write_str("setup-B"),
            Action::SetupA => f.write_str("setup-A"),
            Action::Share => f.write_str("share"),
            Action::Publish(p) => write!(f, "publish({p})"),
            Action::Init => f.write_str("init"),
            Action::Redeem(p, path) => write!(f, "redeem({p}, {path})"),
        }
    }
}

/// The 21-action alphabet the model checker enumerates.
pub fn action_alphabet() -> Vec<Action> {
    let mut actions = vec![
        Action::SetupB,
        Action::SetupA,
        Action::Share,
        Action::Publish(PartyId::Alice),
        Action::Publish(PartyId::Bob),
        Action::Init,
    ];
    for party in [PartyId::Alice, PartyId::Bob, PartyId::Miner(1)] {
        for path in [
            RedeemPath::DepA,
            RedeemPath::DepB,
            RedeemPath::DepM,
            RedeemPath::ColB,
            RedeemPath::ColM,
        ] {
            actions.push(Action::Redeem(party, path));
        }
    }
    actions
}

pub type ActionScript = Vec<Action>;

pub fn script_string(script: &[Action]) -> String {
    script
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// What applying one action did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    Ignored,
    Applied,
    RedeemResult(bool),
}

/// The ideal reference model: seven monotone indicators, all initially 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrmhState {
    pub setup_a: bool,
    pub setup_b: bool,
    pub shared: bool,
    pub published: bool,
    pub init: bool,
    pub w1: bool,
    pub w2: bool,
}

/// Injectable faults for mutation-testing the checker itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Ideal model skips its second-preimage revelation update.
    SkipW2Update,
    /// Ideal model ignores the share-before-redeem dependency of the first
    /// party's redeem clause.
    IgnoreSharedInW1,
}

impl FrmhState {
    pub fn step(&mut self, action: Action) -> Effect {
        self.step_with_fault(action, None)
    }

    pub fn step_with_fault(&mut self, action: Action, fault: Option<Fault>) -> Effect {
        match action {
            Action::SetupB if !self.setup_b => {
                self.setup_b = true;
                Effect::Applied
            }
            Action::SetupA if self.setup_b && !self.setup_a => {
                self.setup_a = true;
                Effect::Applied
            }
            Action::Share if self.setup_a && !self.shared => {
                self.shared = true;
                Effect::Applied
            }
            Action::Publish(p)
                if matches!(p, PartyId::Alice | PartyId::Bob)
                    && self.setup_a
                    && !self.published =>
            {
                self.published = true;
                Effect::Applied
            }
            Action::Init if self.published && !self.init => {
                self.init = true;
                Effect::Applied
            }
            Action::Redeem(party, path) if self.init => {
                let shared_for_w1 = if fault == Some(Fault::IgnoreSharedInW1) {
                    true
                } else {
                    self.shared
                };
                self.w1 = self.w1
                    || (party == PartyId::Alice && shared_for_w1 && path == RedeemPath::DepA)
                    || (party == PartyId::Bob
                        && matches!(
                            path,
                            RedeemPath::DepA | RedeemPath::DepM | RedeemPath::ColM
                        ));
                if fault != Some(Fault::SkipW2Update) {
                    self.w2 = self.w2
                        || (party == PartyId::Bob
                            && matches!(
                                path,
                                RedeemPath::DepB | RedeemPath::DepM | RedeemPath::ColM
                            ));
                }
                let res = relaxed_predicate(path, party, self.w1, self.w2)
                    .expect("alphabet only contains relaxed-domain paths");
                Effect::RedeemResult(res)
            }
            _ => Effect::Ignored,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
enum Phase {
    #[default]
    Setup,
    Initiation,
    Redeeming,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Initiation => "initiation",
            Phase::Redeeming => "redeeming",
        }
    }
}

/// Known model-vs-text deviations surfaced by the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FlagKind {
    /// The second party's first-path redeem attempt reveals the first
    /// preimage even though the attempt itself evaluates false.
    BobRevealsViaDepA,
    /// The first party's both-preimage attempts do not reveal her preimage;
    /// a literal protocol reading would pass it along.
    AliceBothPathsDoNotReveal,
    /// Sharing accepted after initiation; a literal phase reading would
    /// ignore it.
    ShareAfterInit,
}

/// The protocol machine over mempool-projection semantics, tracking party
/// phases and the projection's revelation indicators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProtocolState {
    phase_a: Phase,
    phase_b: Phase,
    phase_m: Phase,
    b_setup: bool,
    tx_created: bool,
    a_has_pre_a: bool,
    published: bool,
    init: bool,
    y1: bool,
    y2: bool,
}

impl ProtocolState {
    pub fn new() -> ProtocolState {
        ProtocolState {
            // Miners have nothing to set up.
            phase_m: Phase::Initiation,
            ..ProtocolState::default()
        }
    }

    pub fn revealed(&self) -> (bool, bool) {
        (self.y1, self.y2)
    }

    pub fn shared(&self) -> bool {
        self.a_has_pre_a
    }

    pub fn initiated(&self) -> bool {
        self.init
    }

    fn phase_of(&self, p: PartyId) -> Phase {
        match p {
            PartyId::Alice => self.phase_a,
            PartyId::Bob => self.phase_b,
            _ => self.phase_m,
        }
    }

    /// Applies one action, optionally recording flags. `allow_share` disables
    /// the sharing step entirely when false (the scenario where the first
    /// party never learns the preimage).
    pub fn step(
        &mut self,
        action: Action,
        allow_share: bool,
        mut flag: impl FnMut(FlagKind),
    ) -> Effect {
        match action {
            Action::SetupB if self.phase_b == Phase::Setup && !self.b_setup => {
                self.b_setup = true;
                Effect::Applied
            }
            Action::SetupA if self.phase_a == Phase::Setup && self.b_setup => {
                // The projection creates the initiating transaction and sends
                // it to both parties, moving them to the initiation phase.
                self.tx_created = true;
                self.phase_a = Phase::Initiation;
                self.phase_b = Phase::Initiation;
                Effect::Applied
            }
            Action::Share if allow_share && self.tx_created && !self.a_has_pre_a => {
                if self.phase_b == Phase::Redeeming {
                    flag(FlagKind::ShareAfterInit);
                }
                self.a_has_pre_a = true;
                Effect::Applied
            }
            Action::Publish(p)
                if matches!(p, PartyId::Alice | PartyId::Bob)
                    && self.phase_of(p) == Phase::Initiation
                    && self.tx_created
                    && !self.published =>
            {
                self.published = true;
                Effect::Applied
            }
            Action::Init if self.published && !self.init => {
                self.init = true;
                self.phase_a = Phase::Redeeming;
                self.phase_b = Phase::Redeeming;
                self.phase_m = Phase::Redeeming;
                Effect::Applied
            }
            Action::Redeem(party, path) if self.phase_of(party) == Phase::Redeeming => {
                let provides_a = match party {
                    // Mirrors the ideal model: only the dedicated first path
                    // passes her preimage along.
                    PartyId::Alice => {
                        if self.a_has_pre_a
                            && matches!(path, RedeemPath::DepM | RedeemPath::ColM)
                        {
                            flag(FlagKind::AliceBothPathsDoNotReveal);
                        }
                        self.a_has_pre_a && path == RedeemPath::DepA
                    }
                    PartyId::Bob => {
                        if path == RedeemPath::DepA {
                            flag(FlagKind::BobRevealsViaDepA);
                        }
                        matches!(
                            path,
                            RedeemPath::DepA | RedeemPath::DepM | RedeemPath::ColM
                        )
                    }
                    _ => false,
                };
                let provides_b = party == PartyId::Bob
                    && matches!(
                        path,
                        RedeemPath::DepB | RedeemPath::DepM | RedeemPath::ColM
                    );
                self.y1 |= provides_a;
                self.y2 |= provides_b;
                let res = relaxed_predicate(path, party, self.y1, self.y2)
                    .expect("alphabet only contains relaxed-domain paths");
                Effect::RedeemResult(res)
            }
            _ => Effect::Ignored,
        }
    }
}

/// Final role view for trace reports.
#[derive(Debug, Clone, Serialize)]
pub struct RoleReport {
    pub phase: String,
    pub holds: Vec<String>,
}

/// Outcome of running a script against one model.
#[derive(Debug, Clone, Serialize)]
pub struct TraceOutcome {
    /// One entry per redeem action in script order; `None` means ignored.
    pub redeem_results: Vec<Option<bool>>,
    pub shared: bool,
    pub w1: bool,
    pub w2: bool,
    pub roles: Vec<(String, RoleReport)>,
    pub mempool: Vec<String>,
    pub revealed: Vec<String>,
    pub flags: Vec<FlagKind>,
}

/// Runs the protocol machine over a concrete contract instance: preimages are
/// drawn, digests derived, and the published artifacts reported. When
/// `with_share` is false the sharing step is disabled.
pub fn run_protocol(script: &[Action], with_share: bool) -> TraceOutcome {
    let hasher = Hasher::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d61642d68746c63);
    let pre_a = Preimage::random(&mut rng, hasher.mu_bits());
    let pre_b = Preimage::random(&mut rng, hasher.mu_bits());
    let dig_a = hasher.digest_preimage(&pre_a);
    let dig_b = hasher.digest_preimage(&pre_b);

    let mut state = ProtocolState::new();
    let mut results = Vec::new();
    let mut mempool = Vec::new();
    let mut flags = Vec::new();
    for &action in script {
        let effect = state.step(action, with_share, |f| flags.push(f));
        match (action, effect) {
            (_, Effect::Ignored) => {
                if matches!(action, Action::Redeem(..)) {
                    results.push(None);
                }
            }
            (Action::Publish(p), Effect::Applied) => {
                mempool.push(format!("init-tx published by {p}"));
            }
            (Action::Redeem(party, path), Effect::RedeemResult(res)) => {
                mempool.push(format!("redeem {path} by {party} -> {res}"));
                results.push(Some(res));
            }
            _ => {}
        }
    }

    let (y1, y2) = state.revealed();
    let mut revealed = Vec::new();
    if y1 {
        revealed.push(format!("pre_a (digest {dig_a})"));
    }
    if y2 {
        revealed.push(format!("pre_b (digest {dig_b})"));
    }
    flags.sort();
    flags.dedup();
    TraceOutcome {
        redeem_results: results,
        shared: state.shared(),
        w1: y1,
        w2: y2,
        roles: vec![
            (
                "alice".to_string(),
                RoleReport {
                    phase: state.phase_a.name().to_string(),
                    holds: if state.a_has_pre_a {
                        vec!["pre_a".to_string()]
                    } else {
                        vec![]
                    },
                },
            ),
            (
                "bob".to_string(),
                RoleReport {
                    phase: state.phase_b.name().to_string(),
                    holds: if state.b_setup {
                        vec!["pre_a".to_string(), "pre_b".to_string()]
                    } else {
                        vec![]
                    },
                },
            ),
            (
                "miner".to_string(),
                RoleReport {
                    phase: state.phase_m.name().to_string(),
                    holds: vec![],
                },
            ),
        ],
        mempool,
        revealed,
        flags,
    }
}

/// Runs the ideal-functionality transition system literally.
pub fn run_frmh(script: &[Action]) -> TraceOutcome {
    let mut state = FrmhState::default();
    let mut results = Vec::new();
    let mut mempool = Vec::new();
    for &action in script {
        let effect = state.step(action);
        match (action, effect) {
            (Action::Redeem(..), Effect::Ignored) => results.push(None),
            (Action::Publish(p), Effect::Applied) => {
                mempool.push(format!("init-tx published by {p}"));
            }
            (Action::Redeem(party, path), Effect::RedeemResult(res)) => {
                mempool.push(format!("redeem {path} by {party} -> {res}"));
                results.push(Some(res));
            }
            _ => {}
        }
    }
    let mut revealed = Vec::new();
    if state.w1 {
        revealed.push("pre_a".to_string());
    }
    if state.w2 {
        revealed.push("pre_b".to_string());
    }
    TraceOutcome {
        redeem_results: results,
        shared: state.shared,
        w1: state.w1,
        w2: state.w2,
        roles: vec![],
        mempool,
        revealed,
        flags: vec![],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub script: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleViolation {
    pub script: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlagSummary {
    pub kind: FlagKind,
    pub occurrences: u64,
    pub example: String,
}

/// Result of the bounded lockstep exploration.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub max_len: usize,
    pub scripts_checked: u64,
    pub discrepancies: Vec<Discrepancy>,
    #[serde(rename = "lemma1_violations")]
    pub rule_violations: Vec<RuleViolation>,
    pub flags: Vec<FlagSummary>,
}

const REPORT_CAP: usize = 16;

#[derive(Default)]
struct BranchStats {
    nodes: u64,
    discrepancies: Vec<Discrepancy>,
    violations: Vec<RuleViolation>,
    flag_counts: [u64; 3],
    flag_examples: [Option<String>; 3],
}

impl BranchStats {
    fn merge(&mut self, other: BranchStats) {
        self.nodes += other.nodes;
        for d in other.discrepancies {
            if self.discrepancies.len() < REPORT_CAP {
                self.discrepancies.push(d);
            }
        }
        for v in other.violations {
            if self.violations.len() < REPORT_CAP {
                self.violations.push(v);
            }
        }
        for i in 0..3 {
            self.flag_counts[i] += other.flag_counts[i];
            if self.flag_examples[i].is_none() {
                self.flag_examples[i] = other.flag_examples[i].clone();
            }
        }
    }
}

fn flag_index(kind: FlagKind) -> usize {
    match kind {
        FlagKind::BobRevealsViaDepA => 0,
        FlagKind::AliceBothPathsDoNotReveal => 1,
        FlagKind::ShareAfterInit => 2,
    }
}

fn flag_of_index(i: usize) -> FlagKind {
    [
        FlagKind::BobRevealsViaDepA,
        FlagKind::AliceBothPathsDoNotReveal,
        FlagKind::ShareAfterInit,
    ][i]
}

/// Checks one redeem against the valid-transaction capability rules, on the
/// ideal model's pre-action state. Returns an error description, or the
/// known-quirk flag the case falls under.
fn check_capability(
    pre: FrmhState,
    party: PartyId,
    path: RedeemPath,
    result: bool,
) -> Result<Option<FlagKind>, String> {
    let expected = match party {
        PartyId::Bob => matches!(
            path,
            RedeemPath::DepB | RedeemPath::DepM | RedeemPath::ColB | RedeemPath::ColM
        ),
        PartyId::Alice => match path {
            RedeemPath::DepA => pre.w1 || pre.shared,
            RedeemPath::DepM | RedeemPath::ColM => {
                if pre.shared && !pre.w1 && pre.w2 {
                    // Documented model quirk: her preimage is not passed along
                    // on these paths, so the attempt fails although the
                    // capability rule reads as satisfiable.
                    if result {
                        return Err(format!(
                            "expected the quirk to make {path} by {party} false"
                        ));
                    }
                    return Ok(Some(FlagKind::AliceBothPathsDoNotReveal));
                }
                (pre.w1 || pre.shared) && pre.w2
            }
            _ => false,
        },
        _ => matches!(path, RedeemPath::DepM | RedeemPath::ColM) && pre.w1 && pre.w2,
    };
    if result == expected {
        Ok(None)
    } else {
        Err(format!(
            "redeem {path} by {party}: got {result}, capability rules say {expected}"
        ))
    }
}

/// Applies one action to both machines, records every check against `stats`,
/// and returns the successor states.
fn visit_node(
    action: Action,
    script: &[Action],
    proto: ProtocolState,
    ideal: FrmhState,
    fault: Option<Fault>,
    stats: &mut BranchStats,
) -> (ProtocolState, FrmhState) {
    stats.nodes += 1;
    let mut p = proto;
    let mut i = ideal;
    let mut local_flags: Vec<FlagKind> = Vec::new();
    let ideal_pre = i;
    let ep = p.step(action, true, |f| local_flags.push(f));
    let ei = i.step_with_fault(action, fault);

    for f in &local_flags {
        let idx = flag_index(*f);
        stats.flag_counts[idx] += 1;
        if stats.flag_examples[idx].is_none() {
            stats.flag_examples[idx] = Some(script_string(script));
        }
    }

    if ep != ei {
        if stats.discrepancies.len() < REPORT_CAP {
            stats.discrepancies.push(Discrepancy {
                script: script_string(script),
                detail: format!("effects differ: protocol {ep:?}, ideal {ei:?}"),
            });
        }
    } else {
        let (y1, y2) = p.revealed();
        if (p.shared(), y1, y2) != (i.shared, i.w1, i.w2) && stats.discrepancies.len() < REPORT_CAP
        {
            stats.discrepancies.push(Discrepancy {
                script: script_string(script),
                detail: format!(
                    "state triples differ: protocol (shared={}, w1={}, w2={}), ideal (shared={}, w1={}, w2={})",
                    p.shared(),
                    y1,
                    y2,
                    i.shared,
                    i.w1,
                    i.w2
                ),
            });
        }
    }

    // Knowledge monotonicity and phase safety.
    if (ideal_pre.w1 && !i.w1) || (ideal_pre.w2 && !i.w2) || (ideal_pre.shared && !i.shared) {
        if stats.violations.len() < REPORT_CAP {
            stats.violations.push(RuleViolation {
                script: script_string(script),
                detail: "knowledge regressed".to_string(),
            });
        }
    }
    if let Action::Redeem(party, path) = action {
        if let Effect::RedeemResult(res) = ei {
            if !ideal_pre.init && stats.violations.len() < REPORT_CAP {
                stats.violations.push(RuleViolation {
                    script: script_string(script),
                    detail: "redeem evaluated before initiation".to_string(),
                });
            }
            match check_capability(ideal_pre, party, path, res) {
                Ok(Some(f)) => {
                    // Counted through the protocol machine's own flag when it
                    // saw the same event this step.
                    if !local_flags.contains(&f) {
                        stats.flag_counts[flag_index(f)] += 1;
                    }
                }
                Ok(None) => {}
                Err(detail) => {
                    if stats.violations.len() < REPORT_CAP {
                        stats.violations.push(RuleViolation {
                            script: script_string(script),
                            detail,
                        });
                    }
                }
            }
        }
    }
    (p, i)
}

fn explore(
    alphabet: &[Action],
    script: &mut Vec<Action>,
    proto: ProtocolState,
    ideal: FrmhState,
    max_len: usize,
    fault: Option<Fault>,
    stats: &mut BranchStats,
) {
    if script.len() >= max_len {
        return;
    }
    for &action in alphabet {
        script.push(action);
        let (p, i) = visit_node(action, script, proto, ideal, fault, stats);
        explore(alphabet, script, p, i, max_len, fault, stats);
        script.pop();
    }
}

/// Enumerates every action script up to `max_len`, runs both models in
/// lockstep, and reports any divergence in redeem results or in the
/// `(shared, w1, w2)` triple, any capability-rule violation, and the
/// documented model quirks it encountered.
pub fn model_check(max_len: usize) -> EquivalenceReport {
    model_check_with_fault(max_len, None)
}

/// Same as [`model_check`] with an injected fault in the ideal model, for
/// testing that the checker actually detects divergence.
pub fn model_check_with_fault(max_len: usize, fault: Option<Fault>) -> EquivalenceReport {
    let alphabet = action_alphabet();
    let proto0 = ProtocolState::new();
    let ideal0 = FrmhState::default();

    let branches: Vec<BranchStats> = alphabet
        .par_iter()
        .map(|&first| {
            let mut stats = BranchStats::default();
            if max_len == 0 {
                return stats;
            }
            let mut script = vec![first];
            let (p, i) = visit_node(first, &script, proto0, ideal0, fault, &mut stats);
            explore(&alphabet, &mut script, p, i, max_len, fault, &mut stats);
            stats
        })
        .collect();
    let mut total = BranchStats::default();
    for b in branches {
        total.merge(b);
    }

    total.discrepancies.truncate(REPORT_CAP);
    total.violations.truncate(REPORT_CAP);
    let flags = (0..3)
        .filter(|&i| total.flag_counts[i] > 0)
        .map(|i| FlagSummary {
            kind: flag_of_index(i),
            occurrences: total.flag_counts[i],
            example: total.flag_examples[i].clone().unwrap_or_default(),
        })
        .collect();
    EquivalenceReport {
        max_len,
        scripts_checked: total.nodes,
        discrepancies: total.discrepancies,
        rule_violations: total.violations,
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup_prefix() -> Vec<Action> {
        vec![
            Action::SetupB,
            Action::SetupA,
            Action::Share,
            Action::Publish(PartyId::Alice),
            Action::Init,
        ]
    }

    #[test]
    fn shared_preimage_lets_alice_redeem() {
        let mut script = setup_prefix();
        script.push(Action::Redeem(PartyId::Alice, RedeemPath::DepA));
        let out = run_protocol(&script, true);
        assert_eq!(out.redeem_results, vec![Some(true)]);
        assert!(out.shared && out.w1 && !out.w2);
    }

    #[test]
    fn without_share_alice_cannot_redeem() {
        let script = vec![
            Action::SetupB,
            Action::SetupA,
            Action::Publish(PartyId::Bob),
            Action::Init,
            Action::Redeem(PartyId::Alice, RedeemPath::DepA),
        ];
        let out = run_protocol(&script, true);
        assert_eq!(out.redeem_results, vec![Some(false)]);
        let out = run_protocol(&setup_prefix(), false);
        assert!(!out.shared);
    }

    #[test]
    fn redeem_before_init_is_ignored() {
        let script = vec![Action::Redeem(PartyId::Bob, RedeemPath::ColB)];
        let out = run_protocol(&script, true);
        assert_eq!(out.redeem_results, vec![None]);
        let out = run_frmh(&script);
        assert_eq!(out.redeem_results, vec![None]);
    }

    #[test]
    fn ideal_model_matches_its_defining_examples() {
        let mut script = setup_prefix();
        script.push(Action::Redeem(PartyId::Bob, RedeemPath::DepB));
        let out = run_frmh(&script);
        assert_eq!(out.redeem_results, vec![Some(true)]);
        assert!(out.w2);

        let script = vec![
            Action::SetupB,
            Action::SetupA,
            Action::Publish(PartyId::Bob),
            Action::Init,
            Action::Redeem(PartyId::Alice, RedeemPath::DepA),
        ];
        let out = run_frmh(&script);
        assert_eq!(out.redeem_results, vec![Some(false)]);
        assert!(!out.w1);

        let mut script = setup_prefix();
        script.push(Action::Redeem(PartyId::Bob, RedeemPath::DepM));
        script.push(Action::Redeem(PartyId::Miner(1), RedeemPath::DepM));
        let out = run_frmh(&script);
        assert_eq!(out.redeem_results, vec![Some(true), Some(true)]);
    }

    #[test]
    fn bob_dep_a_attempt_reveals_but_fails() {
        let mut script = setup_prefix();
        script.push(Action::Redeem(PartyId::Bob, RedeemPath::DepA));
        let proto = run_protocol(&script, true);
        let ideal = run_frmh(&script);
        assert_eq!(proto.redeem_results, vec![Some(false)]);
        assert_eq!(ideal.redeem_results, vec![Some(false)]);
        assert!(proto.w1 && ideal.w1);
        assert!(proto.flags.contains(&FlagKind::BobRevealsViaDepA));
    }

    #[test]
    fn models_agree_to_depth_four() {
        let report = model_check(4);
        assert!(report.discrepancies.is_empty(), "{:?}", report.discrepancies);
        assert!(
            report.rule_violations.is_empty(),
            "{:?}",
            report.rule_violations
        );
        let expected: u64 = (1..=4).map(|l| 21u64.pow(l)).sum();
        assert_eq!(report.scripts_checked, expected);
    }

    #[test]
    fn injected_fault_is_detected() {
        let report = model_check_with_fault(5, Some(Fault::SkipW2Update));
        assert!(!report.discrepancies.is_empty());
        let report = model_check_with_fault(5, Some(Fault::IgnoreSharedInW1));
        assert!(!report.discrepancies.is_empty() || !report.rule_violations.is_empty());
    }
}
