//! Assertion shapes of the market conversation.

use std::fmt;
use std::str::FromStr;

use dataspace_core::rec;
use dataspace_core::values::{Pattern, Value};

pub const TRADING_DAY_OPEN: &str = "trading-day-open";
pub const ORDER: &str = "order";
pub const ORDER_RESULT: &str = "order-result";
pub const FUNDS_NEEDED: &str = "funds-needed";
pub const FUNDS_HELD: &str = "funds-held";
pub const PRICE: &str = "price";
pub const PURCHASE_REQUEST: &str = "purchase-request";
pub const PURCHASE_RESULT: &str = "purchase-result";
pub const WITHDRAW_FUNDS: &str = "withdraw-funds";
pub const DEPOSIT_FUNDS: &str = "deposit-funds";
pub const BANK_RESPONSE: &str = "bank-response";
pub const BALANCE: &str = "balance";
pub const BROKER: &str = "broker";

/// How an order ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Answer {
    Canceled,
    InsufficientFunds,
    NoPriceMatch,
    Fulfilled,
}

impl Answer {
    pub const ALL: [Answer; 4] = [Answer::Canceled, Answer::InsufficientFunds, Answer::NoPriceMatch, Answer::Fulfilled];

    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Canceled => "canceled",
            Answer::InsufficientFunds => "insufficient-funds",
            Answer::NoPriceMatch => "no-price-match",
            Answer::Fulfilled => "fulfilled",
        }
    }

    pub fn to_value(self) -> Value {
        Value::symbol(self.as_str())
    }

    pub fn from_value(v: &Value) -> Option<Answer> {
        v.as_symbol().and_then(|s| s.parse().ok())
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Answer::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| format!("unknown answer `{s}`"))
    }
}

/// A parsed `(order id account n p)` or, with a broker name,
/// `(order id broker account n p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub value: Value,
    pub id: Value,
    pub broker: Option<Value>,
    pub account: Value,
    pub shares: i64,
    pub max_price: i64,
}

impl Order {
    pub fn new(id: Value, broker: Option<Value>, account: Value, shares: i64, max_price: i64) -> Order {
        let value = match &broker {
            None => rec!(ORDER, &id, &account, shares, max_price),
            Some(b) => rec!(ORDER, &id, b, &account, shares, max_price),
        };
        Order { value, id, broker, account, shares, max_price }
    }

    pub fn parse(v: &Value) -> Option<Order> {
        let (_, fields) = v.as_record().filter(|(l, _)| *l == ORDER)?;
        let (id, broker, rest) = match fields {
            [id, a, n, p] => (id, None, [a, n, p]),
            [id, b, a, n, p] => (id, Some(b.clone()), [a, n, p]),
            _ => return None,
        };
        Some(Order {
            value: v.clone(),
            id: id.clone(),
            broker,
            account: rest[0].clone(),
            shares: rest[1].as_integer()?,
            max_price: rest[2].as_integer()?,
        })
    }

    /// Funds to hold for the order: shares times the maximum price.
    pub fn max_cost(&self) -> i64 {
        self.shares * self.max_price
    }
}

pub fn trading_day_open() -> Value {
    rec!(TRADING_DAY_OPEN)
}

pub fn order_result(order: &Value, answer: Answer) -> Value {
    rec!(ORDER_RESULT, order, answer.to_value())
}

/// `(order-result order $ans)`.
pub fn order_result_pattern(order: &Value) -> Pattern {
    Pattern::record(ORDER_RESULT, vec![Pattern::lit(order.clone()), Pattern::capture("ans")])
}

pub fn funds_needed(order: &Value, account: &Value, amount: i64) -> Value {
    rec!(FUNDS_NEEDED, order, account, amount)
}

pub fn funds_held(order: &Value, account: &Value, amount: i64, ok: bool) -> Value {
    rec!(FUNDS_HELD, order, account, amount, ok)
}

pub fn withdraw_funds(id: &Value, account: &Value, amount: i64) -> Value {
    rec!(WITHDRAW_FUNDS, id, account, amount)
}

pub fn deposit_funds(id: &Value, account: &Value, amount: i64) -> Value {
    rec!(DEPOSIT_FUNDS, id, account, amount)
}

pub fn bank_response(id: &Value, ok: bool) -> Value {
    rec!(BANK_RESPONSE, id, ok)
}

pub fn balance(account: &Value, amount: i64) -> Value {
    rec!(BALANCE, account, amount)
}

/// Every integer field of a matching assertion, for audits over the bag.
pub fn amount_of(v: &Value, label: &str, arity: usize, index: usize) -> Option<i64> {
    v.record_fields(label, arity)?.get(index)?.as_integer()
}
