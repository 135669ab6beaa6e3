//! Scripted market runs: configuration, the script format, the runner and its audits.
//!
//! A script is one command per line in the canonical value syntax; `;` starts a comment.
//!
//! ```text
//! (account alice 1000)        ; setup: bank account with opening balance
//! (seller s1 40)              ; setup: seller and asking price
//! (broker b1 2)               ; setup (extended only): broker and fee
//! (place alice o1 5 50)       ; buyer alice orders 5 shares at most 50 each, called o1
//! (cancel alice o1)
//! (seller-leaves s1)
//! (add-seller s2 45)
//! (advert s3 30)              ; extended only: advertises a price, never sells
//! (advance 500)               ; move virtual time forward
//! (expect-quiescent)          ; also spelled (quiesce)
//! (expect-balance alice 800)
//! (expect-result o1 fulfilled) ; or pending
//! ```
//!
//! Setup lines come first. `place`, `cancel`, `seller-leaves`, `add-seller` and `advert`
//! only queue their effect; it happens at the next step that runs the dataspace.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use dataspace_core::dataspace::{ActorId, Dataspace, DataspaceConfig};
use dataspace_core::drivers::spawn_timer_driver;
use dataspace_core::facets::FacetActor;
use dataspace_core::rec;
use dataspace_core::values::{parse_values, Value};
use thiserror::Error;

use crate::bank::{published_balances, spawn_bank};
use crate::broker::{spawn_broker, BrokerConfig, Ledger, Purchase, PurchaseCancel};
use crate::buyer::{self, spawn_buyer, Outcome, Outcomes};
use crate::clock::spawn_clock;
use crate::protocol::{Answer, Order, DEPOSIT_FUNDS, FUNDS_HELD, ORDER_RESULT};
use crate::seller::{seller_boot, SellerKind, SELLER_LEAVE};
use crate::wallet::spawn_wallet;

const MAX_TURNS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// One anonymous broker and `(price p)` sellers.
    Simple,
    /// Named brokers with fees and named sellers.
    Extended,
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simple" => Ok(ScenarioKind::Simple),
            "extended" => Ok(ScenarioKind::Extended),
            _ => Err(format!("unknown scenario `{s}` (expected simple or extended)")),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Simple => "simple",
            ScenarioKind::Extended => "extended",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub open_ms: u64,
    pub closed_ms: u64,
    pub wait_ms: i64,
    pub seed: u64,
    pub on_cancel_in_purchase: PurchaseCancel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            kind: ScenarioKind::Simple,
            open_ms: 1000,
            closed_ms: 500,
            wait_ms: 100,
            seed: 0,
            on_cancel_in_purchase: PurchaseCancel::Ignore,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Setup {
    Account(Value, i64),
    Seller(Value, i64),
    Broker(Value, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Place {
        buyer: Value,
        reference: Value,
        shares: i64,
        max_price: i64,
    },
    Cancel {
        buyer: Value,
        reference: Value,
    },
    SellerLeaves(Value),
    AddSeller(Value, i64),
    Advert(Value, i64),
    Advance(u64),
    ExpectQuiescent,
    ExpectBalance(Value, i64),
    /// `None` expects the order to still be pending.
    ExpectResult(Value, Option<Answer>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    pub setup: Vec<(usize, Setup)>,
    pub steps: Vec<(usize, Step)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ScriptError {
    pub line: usize,
    pub msg: String,
}

fn symbol(v: &Value, what: &str) -> Result<Value, String> {
    v.as_symbol().map(|_| v.clone()).ok_or_else(|| format!("{what} must be a symbol, got {v}"))
}

fn amount(v: &Value, what: &str) -> Result<i64, String> {
    v.as_integer().filter(|n| *n >= 0).ok_or_else(|| format!("{what} must be a non-negative integer, got {v}"))
}

impl Script {
    pub fn parse(src: &str) -> Result<Script, ScriptError> {
        let values = parse_values(src).map_err(|e| ScriptError { line: e.line, msg: e.msg })?;
        let mut script = Script::default();
        let mut accounts: Vec<Value> = Vec::new();
        let mut placed: Vec<Value> = Vec::new();
        for (line, v) in values {
            let err = |msg: String| ScriptError { line, msg };
            let Some((label, args)) = v.as_record() else {
                return Err(err(format!("expected a command record, got {v}")));
            };
            let setup = |s: Setup, script: &mut Script| {
                if script.steps.is_empty() {
                    script.setup.push((line, s));
                    Ok(())
                } else {
                    Err(err(format!("`{label}` must come before the first step")))
                }
            };
            let known_buyer = |b: &Value| {
                if accounts.contains(b) {
                    Ok(b.clone())
                } else {
                    Err(err(format!("no account {b}")))
                }
            };
            let known_ref = |r: &Value| {
                if placed.contains(r) {
                    Ok(r.clone())
                } else {
                    Err(err(format!("order {r} was not placed earlier")))
                }
            };
            match (label, args) {
                ("account", [a, n]) => {
                    let a = symbol(a, "account").map_err(err)?;
                    if accounts.contains(&a) {
                        return Err(err(format!("account {a} declared twice")));
                    }
                    accounts.push(a.clone());
                    setup(Setup::Account(a, amount(n, "balance").map_err(err)?), &mut script)?;
                }
                ("seller", [s, p]) => setup(
                    Setup::Seller(symbol(s, "seller").map_err(err)?, amount(p, "price").map_err(err)?),
                    &mut script,
                )?,
                ("broker", [b, fee]) => setup(
                    Setup::Broker(symbol(b, "broker").map_err(err)?, amount(fee, "fee").map_err(err)?),
                    &mut script,
                )?,
                ("place", [b, r, n, p]) => {
                    let buyer = known_buyer(b)?;
                    if placed.contains(r) {
                        return Err(err(format!("order {r} placed twice")));
                    }
                    placed.push(r.clone());
                    let (shares, max_price) = (amount(n, "shares").map_err(err)?, amount(p, "price").map_err(err)?);
                    script.steps.push((line, Step::Place { buyer, reference: r.clone(), shares, max_price }));
                }
                ("cancel", [b, r]) => {
                    let step = Step::Cancel { buyer: known_buyer(b)?, reference: known_ref(r)? };
                    script.steps.push((line, step));
                }
                ("seller-leaves", [s]) => {
                    script.steps.push((line, Step::SellerLeaves(symbol(s, "seller").map_err(err)?)))
                }
                ("add-seller", [s, p]) => script
                    .steps
                    .push((line, Step::AddSeller(symbol(s, "seller").map_err(err)?, amount(p, "price").map_err(err)?))),
                ("advert", [s, p]) => script
                    .steps
                    .push((line, Step::Advert(symbol(s, "seller").map_err(err)?, amount(p, "price").map_err(err)?))),
                ("advance", [ms]) => script.steps.push((line, Step::Advance(amount(ms, "delay").map_err(err)? as u64))),
                ("expect-quiescent" | "quiesce", []) => script.steps.push((line, Step::ExpectQuiescent)),
                ("expect-balance", [a, n]) => {
                    let step = Step::ExpectBalance(known_buyer(a)?, amount(n, "balance").map_err(err)?);
                    script.steps.push((line, step));
                }
                ("expect-result", [r, ans]) => {
                    let r = known_ref(r)?;
                    let answer = match ans.as_symbol() {
                        Some("pending") => None,
                        Some(s) => Some(s.parse::<Answer>().map_err(err)?),
                        None => return Err(err(format!("expected an answer symbol, got {ans}"))),
                    };
                    script.steps.push((line, Step::ExpectResult(r, answer)));
                }
                _ => return Err(err(format!("unknown command {v}"))),
            }
        }
        Ok(script)
    }
}

/// A failed expectation or audit, located by script line and dataspace turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub line: usize,
    pub turn: u64,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} (turn {}): {}", self.line, self.turn, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioResult {
    pub balances: BTreeMap<Value, i64>,
    pub outcomes: BTreeMap<Value, Outcome>,
    pub trace: Vec<String>,
    pub failures: Vec<Failure>,
    pub purchases: Vec<Purchase>,
    /// Quiescent points at which the audits ran.
    pub audits: usize,
}

impl ScenarioResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The trace as JSONL text, one turn per line.
    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn answer(&self, reference: &str) -> Option<Answer> {
        self.outcomes.get(&Value::symbol(reference)).and_then(|o| o.answer)
    }

    pub fn balance(&self, account: &str) -> Option<i64> {
        self.balances.get(&Value::symbol(account)).copied()
    }
}

/// A market under construction or running; the scenario runner drives one of these.
pub struct Market {
    pub ds: Dataspace,
    pub config: ScenarioConfig,
    pub outcomes: Outcomes,
    pub ledger: Ledger,
    opening_total: i64,
    answers_seen: BTreeMap<Value, Value>,
    failures: Vec<Failure>,
    audits: usize,
}

impl Market {
    /// Spawn the timer driver, clock, bank, wallet, sellers, brokers and one buyer per account.
    pub fn new(config: ScenarioConfig, setup: &[Setup]) -> Market {
        let mut ds = Dataspace::new(DataspaceConfig { seed: config.seed, ..DataspaceConfig::default() });
        let ledger = Ledger::default();
        let outcomes = Outcomes::default();
        spawn_timer_driver(&mut ds);
        spawn_clock(&mut ds, config.open_ms, config.closed_ms);
        let accounts: BTreeMap<Value, i64> = setup
            .iter()
            .filter_map(|s| match s {
                Setup::Account(a, n) => Some((a.clone(), *n)),
                _ => None,
            })
            .collect();
        let opening_total = accounts.values().sum();
        spawn_bank(&mut ds, accounts.clone());
        spawn_wallet(&mut ds);
        let mut market = Market {
            ds,
            config,
            outcomes,
            ledger,
            opening_total,
            answers_seen: BTreeMap::new(),
            failures: Vec::new(),
            audits: 0,
        };
        for s in setup {
            if let Setup::Seller(name, p) = s {
                market.add_seller(name, *p, false);
            }
        }
        let brokers: Vec<(Value, i64)> = setup
            .iter()
            .filter_map(|s| match s {
                Setup::Broker(b, fee) => Some((b.clone(), *fee)),
                _ => None,
            })
            .collect();
        let extended = market.config.kind == ScenarioKind::Extended;
        if !extended {
            market.add_broker(None, 0);
        } else if brokers.is_empty() {
            market.add_broker(Some(Value::symbol("broker")), 0);
        }
        for (b, fee) in brokers {
            market.add_broker(Some(b), fee);
        }
        for a in accounts.keys() {
            spawn_buyer(&mut market.ds, a, extended, market.outcomes.clone());
        }
        market
    }

    pub fn add_broker(&mut self, name: Option<Value>, fee: i64) -> ActorId {
        let cfg = BrokerConfig {
            name,
            fee,
            wait_ms: self.config.wait_ms,
            on_cancel_in_purchase: self.config.on_cancel_in_purchase,
            ledger: self.ledger.clone(),
        };
        spawn_broker(&mut self.ds, cfg)
    }

    pub fn add_seller(&mut self, name: &Value, price: i64, advert_only: bool) -> ActorId {
        let kind = match (self.config.kind, advert_only) {
            (_, true) => SellerKind::AdvertOnly,
            (ScenarioKind::Simple, false) => SellerKind::Anonymous,
            (ScenarioKind::Extended, false) => SellerKind::Named,
        };
        let label = format!("seller {name}");
        self.ds.spawn(label.clone(), FacetActor::boxed(label, seller_boot(kind, name.clone(), price)))
    }

    pub fn opening_total(&self) -> i64 {
        self.opening_total
    }

    fn fail(&mut self, line: usize, message: String) {
        let turn = self.ds.turns_run();
        self.failures.push(Failure { line, turn, message });
    }

    /// Run to quiescence and audit; false if the run did not settle.
    pub fn quiesce(&mut self, line: usize) -> bool {
        match self.ds.run_until_quiescent(MAX_TURNS) {
            Ok(_) => {
                self.audit(line);
                true
            }
            Err(e) => {
                self.fail(line, format!("no quiescence: {e}"));
                false
            }
        }
    }

    /// Move virtual time forward one timer deadline at a time, auditing after each.
    pub fn advance(&mut self, line: usize, ms: u64) -> bool {
        if !self.quiesce(line) {
            return false;
        }
        let target = self.ds.now() + ms;
        loop {
            let now = self.ds.now();
            let step = match self.ds.next_deadline() {
                Some(d) if d <= target => d.saturating_sub(now),
                _ => target - now,
            };
            if let Err(e) = self.ds.advance_virtual_time(step, MAX_TURNS) {
                self.fail(line, format!("advance failed: {e}"));
                return false;
            }
            self.audit(line);
            if self.ds.now() >= target {
                return true;
            }
        }
    }

    /// Money conservation, single answer and context cleanup at the current quiescent point.
    pub fn audit(&mut self, line: usize) {
        self.audits += 1;
        let balances: i64 = published_balances(&self.ds).values().sum();
        let mut held = 0;
        let mut in_transit = 0;
        let mut results: BTreeMap<Value, Vec<Value>> = BTreeMap::new();
        for v in self.ds.bag().present() {
            if let Some([_, _, amt, ok]) = v.record_fields(FUNDS_HELD, 4) {
                if ok.as_bool() == Some(true) {
                    held += amt.as_integer().unwrap_or(0);
                }
            } else if let Some([_, _, amt]) = v.record_fields(DEPOSIT_FUNDS, 3) {
                in_transit += amt.as_integer().unwrap_or(0);
            } else if let Some([order, ans]) = v.record_fields(ORDER_RESULT, 2) {
                results.entry(order.clone()).or_default().push(ans.clone());
            }
        }
        let spent = self.ledger.spent();
        let total = balances + held + in_transit + spent;
        if total != self.opening_total {
            self.fail(
                line,
                format!(
                    "money not conserved: balances {balances} + held {held} + in transit {in_transit} + spent {spent} = {total}, opened with {}",
                    self.opening_total
                ),
            );
        }
        for (order, answers) in results {
            if answers.len() > 1 {
                self.fail(line, format!("order {order} has {} answers", answers.len()));
            }
            let first = self.answers_seen.entry(order.clone()).or_insert_with(|| answers[0].clone()).clone();
            if answers.iter().any(|a| *a != first) {
                self.fail(line, format!("order {order} answered {first} and later {}", answers[0]));
            }
        }
        let confirmed: Vec<(Value, Value, Option<Answer>)> = self
            .outcomes
            .borrow()
            .iter()
            .filter(|(_, o)| o.answer.is_some())
            .map(|(r, o)| (r.clone(), o.order.clone(), o.answer))
            .collect();
        for (reference, order, answer) in confirmed {
            if let Some(seen) = self.answers_seen.get(&order) {
                if Answer::from_value(seen) != answer {
                    self.fail(line, format!("buyer recorded {answer:?} for {reference} but the broker said {seen}"));
                }
            }
            let Some(id) = Order::parse(&order).map(|o| o.id) else { continue };
            let leftovers: Vec<String> =
                self.ds.bag().present().filter(|v| v.contains(&id)).map(|v| v.to_string()).collect();
            if !leftovers.is_empty() {
                self.fail(line, format!("order {reference} confirmed but still mentioned by {}", leftovers.join(", ")));
            }
        }
    }

    /// Run one script step; false aborts the script.
    pub fn step(&mut self, line: usize, step: &Step) -> bool {
        match step {
            Step::Place { buyer, reference, shares, max_price } => {
                self.ds.inject_message(buyer::place(buyer, reference, *shares, *max_price))
            }
            Step::Cancel { buyer, reference } => self.ds.inject_message(buyer::cancel(buyer, reference)),
            Step::SellerLeaves(s) => self.ds.inject_message(rec!(SELLER_LEAVE, s)),
            Step::AddSeller(s, p) => {
                self.add_seller(s, *p, false);
            }
            Step::Advert(s, p) => {
                self.add_seller(s, *p, true);
            }
            Step::Advance(ms) => return self.advance(line, *ms),
            Step::ExpectQuiescent => return self.quiesce(line),
            Step::ExpectBalance(a, n) => {
                if !self.quiesce(line) {
                    return false;
                }
                let got = published_balances(&self.ds).get(a).copied();
                if got != Some(*n) {
                    let shown = got.map_or("nothing".to_owned(), |g| g.to_string());
                    self.fail(line, format!("balance of {a}: expected {n}, found {shown}"));
                }
            }
            Step::ExpectResult(r, want) => {
                if !self.quiesce(line) {
                    return false;
                }
                let got = self.outcomes.borrow().get(r).and_then(|o| o.answer);
                if got != *want {
                    let show = |a: Option<Answer>| a.map_or("pending".to_owned(), |a| a.to_string());
                    self.fail(line, format!("order {r}: expected {}, got {}", show(*want), show(got)));
                }
            }
        }
        true
    }

    pub fn finish(mut self, line: usize) -> ScenarioResult {
        self.quiesce(line);
        ScenarioResult {
            balances: published_balances(&self.ds),
            outcomes: self.outcomes.borrow().clone(),
            trace: self.ds.trace().iter().map(|t| t.to_json_line()).collect(),
            failures: self.failures,
            purchases: self.ledger.purchases(),
            audits: self.audits,
        }
    }
}

/// Run `script` under `config` and collect balances, answers, the trace and any failures.
pub fn run_scenario(config: &ScenarioConfig, script: &Script) -> ScenarioResult {
    let setup: Vec<Setup> = script.setup.iter().map(|(_, s)| s.clone()).collect();
    let mut market = Market::new(config.clone(), &setup);
    let first = script.setup.first().map_or(0, |(l, _)| *l);
    if market.quiesce(first) {
        for (line, step) in &script.steps {
            if !market.step(*line, step) {
                break;
            }
        }
    }
    let last = script.steps.last().map_or(first, |(l, _)| *l);
    market.finish(last)
}

/// Parse and run in one go.
pub fn run_script_text(config: &ScenarioConfig, src: &str) -> Result<ScenarioResult, ScriptError> {
    Ok(run_scenario(config, &Script::parse(src)?))
}
