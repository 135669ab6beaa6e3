//! End-to-end market runs checked against hand-computed balances.

use dataspace_market::broker::PurchaseCancel;
use dataspace_market::protocol::Answer;
use dataspace_market::scenario::{run_script_text, ScenarioConfig, ScenarioKind, ScenarioResult};

fn run(config: &ScenarioConfig, src: &str) -> ScenarioResult {
    let r = run_script_text(config, src).expect("script parses");
    assert!(r.failures.is_empty(), "failures: {:#?}", r.failures);
    r
}

fn simple(src: &str) -> ScenarioResult {
    run(&ScenarioConfig::default(), src)
}

fn extended(src: &str) -> ScenarioResult {
    run(&ScenarioConfig { kind: ScenarioKind::Extended, ..ScenarioConfig::default() }, src)
}

#[test]
fn happy_path_spends_two_hundred() {
    let r = simple(
        "(account alice 1000) (seller s 40)
         (place alice o1 5 50)
         (expect-result o1 fulfilled)
         (expect-balance alice 800)",
    );
    assert_eq!(r.answer("o1"), Some(Answer::Fulfilled));
    assert_eq!(r.balance("alice"), Some(800));
    assert_eq!(r.purchases.len(), 1);
    assert_eq!(r.purchases[0].price, 40);
}

#[test]
fn short_account_is_refused() {
    let r = simple("(account alice 100) (seller s 40) (place alice o1 5 50) (expect-result o1 insufficient-funds)");
    assert_eq!(r.balance("alice"), Some(100));
}

#[test]
fn expensive_seller_gives_full_refund() {
    let r = simple("(account alice 1000) (seller s 60) (place alice o1 5 50) (expect-result o1 no-price-match)");
    assert_eq!(r.balance("alice"), Some(1000));
}

#[test]
fn cancel_before_funding() {
    let r = simple(
        "(account alice 1000) (seller s 40) (place alice o1 5 50) (cancel alice o1) (expect-result o1 canceled)",
    );
    assert_eq!(r.balance("alice"), Some(1000));
}

#[test]
fn cancel_after_funding() {
    let r = simple(
        "(account alice 1000)
         (place alice o1 5 50)
         (quiesce)
         (expect-balance alice 750)
         (cancel alice o1)
         (expect-result o1 canceled)
         (expect-balance alice 1000)",
    );
    assert_eq!(r.answer("o1"), Some(Answer::Canceled));
}

#[test]
fn two_buyers_run_independently() {
    let r = simple(
        "(account alice 1000) (account bob 300) (seller s 40)
         (place alice o1 5 50) (place bob o2 10 30)
         (expect-result o1 fulfilled) (expect-result o2 no-price-match)
         (expect-balance alice 800) (expect-balance bob 300)",
    );
    assert_eq!(r.outcomes.len(), 2);
}

#[test]
fn closed_market_waits_for_the_next_day() {
    let r = simple(
        "(account alice 1000) (seller s 40)
         (advance 1100)
         (place alice o1 5 50)
         (expect-result o1 pending)
         (advance 400)
         (expect-result o1 fulfilled)
         (expect-balance alice 800)",
    );
    assert!(r.audits > 3);
}

#[test]
fn funded_order_survives_the_night() {
    let r = simple(
        "(account alice 1000)
         (advance 900) (place alice o1 5 50) (quiesce)
         (expect-balance alice 750)
         (advance 200) (add-seller s 40)
         (advance 500)
         (expect-result o1 fulfilled) (expect-balance alice 800)",
    );
    assert_eq!(r.purchases.len(), 1);
}

#[test]
fn extended_picks_the_cheapest_seller() {
    let r = extended(
        "(account alice 1000) (seller s1 40) (seller s2 55) (broker b1 0)
         (place alice o1 5 50)
         (advance 100)
         (expect-result o1 fulfilled) (expect-balance alice 800)",
    );
    assert_eq!(r.purchases[0].seller.as_ref().map(|s| s.to_string()), Some("s1".to_owned()));
}

#[test]
fn extended_fee_is_charged() {
    let r = extended(
        "(account alice 1000) (seller s1 40) (broker b1 7) (broker b2 3)
         (place alice o1 5 50)
         (advance 100)
         (expect-result o1 fulfilled) (expect-balance alice 797)",
    );
    assert_eq!(r.purchases[0].fee, 3);
}

#[test]
fn extended_sellers_leaving_during_selection() {
    let r = extended(
        "(account alice 1000) (seller s1 40) (seller s2 55)
         (place alice o1 5 50) (quiesce)
         (seller-leaves s1) (seller-leaves s2)
         (advance 100)
         (expect-result o1 no-price-match) (expect-balance alice 1000)",
    );
    assert!(r.purchases.is_empty());
}

#[test]
fn extended_goes_back_to_select_when_the_seller_vanishes() {
    let r = extended(
        "(account alice 1000) (advert s1 40)
         (place alice o1 5 50)
         (advance 100)
         (expect-result o1 pending)
         (seller-leaves s1)
         (advance 100)
         (expect-result o1 no-price-match) (expect-balance alice 1000)",
    );
    assert!(r.purchases.is_empty());
}

#[test]
fn confirmation_wins_over_a_later_registered_cancel() {
    for policy in [PurchaseCancel::After, PurchaseCancel::Ignore] {
        let config = ScenarioConfig { on_cancel_in_purchase: policy, ..ScenarioConfig::default() };
        let r = run(&config, "(account alice 1000) (seller s 40) (place alice o1 5 50) (expect-result o1 fulfilled)");
        assert_eq!(r.balance("alice"), Some(800));
    }
}

#[test]
fn same_script_same_trace() {
    let src = "(account alice 1000) (account bob 500) (seller s 40)
               (place alice o1 5 50) (place bob o2 2 45) (cancel bob o2) (advance 3000)";
    let a = simple(src);
    let b = simple(src);
    assert_eq!(a.trace_text(), b.trace_text());
    assert!(!a.trace.is_empty());
}

#[test]
fn expectation_failures_carry_line_and_turn() {
    let r = run_script_text(
        &ScenarioConfig::default(),
        "(account alice 1000)\n(seller s 40)\n(place alice o1 5 50)\n(expect-balance alice 1)\n",
    )
    .unwrap();
    assert_eq!(r.failures.len(), 1);
    assert_eq!(r.failures[0].line, 4);
    assert!(r.failures[0].turn > 0);
    assert!(r.failures[0].message.contains("expected 1, found 800"), "{}", r.failures[0]);
}

#[test]
fn malformed_scripts_are_rejected() {
    let bad = [
        ("(place bob o1 1 1)", "no account bob"),
        ("(account a 1) (cancel a o9)", "not placed"),
        ("(account a 1) (place a o1 1 1) (account b 2)", "before the first step"),
        ("(account a 1) (place a o1 1 1) (expect-result o1 maybe)", "unknown answer"),
        ("(frobnicate)", "unknown command"),
        ("(account a -5)", "non-negative"),
        ("(account a 1", "1:"),
    ];
    for (src, needle) in bad {
        let e = run_script_text(&ScenarioConfig::default(), src).err().unwrap_or_else(|| panic!("{src} parsed"));
        let shown = format!("{e} {}", e.msg);
        assert!(shown.contains(needle), "{src}: {shown}");
    }
}

mod common;

#[test]
fn contradiction_follows_registration_order() {
    let after = common::contradiction(PurchaseCancel::After, 0);
    assert_eq!((after.answer, after.balance, after.failures), (Some(Answer::Fulfilled), 800, 0));
    let before = common::contradiction(PurchaseCancel::Before, 0);
    assert_eq!((before.answer, before.balance, before.failures), (Some(Answer::Canceled), 1000, 0));
    assert_ne!(after.trace, before.trace);
}

#[test]
fn contradiction_arrives_as_one_patch() {
    let after = common::contradiction(PurchaseCancel::After, 0);
    let combined = after
        .trace
        .lines()
        .any(|l| l.contains("\"event\":\"(patch [(purchase-result (order") && l.contains("] [(order"));
    assert!(combined, "{}", after.trace);
}

#[test]
fn audit_notices_money_from_nowhere() {
    use dataspace_core::dataspace::{behavior, Event};
    use dataspace_core::values::Value;
    use dataspace_market::protocol::funds_held;
    use dataspace_market::scenario::{Market, Setup};

    let mut m = Market::new(ScenarioConfig::default(), &[Setup::Account(Value::symbol("a"), 100)]);
    m.ds.spawn(
        "forger",
        behavior(|event, env| {
            if let Event::Boot = event {
                env.assert(funds_held(&Value::Unique(999), &Value::symbol("a"), 5, true));
            }
            Ok(())
        }),
    );
    m.quiesce(3);
    let r = m.finish(3);
    assert!(!r.passed());
    assert!(r.failures[0].message.contains("money not conserved"), "{}", r.failures[0]);
}
