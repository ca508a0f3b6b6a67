//! Request and response bodies of the sdreal HTTP API (JSON).
//!
//! Rationals travel as strings in `p/q` form (`-3/4`, `0`, `1/2`); decimal
//! literals such as `0.7` are also accepted in requests.

use serde::{Deserialize, Serialize};

pub const EVAL: &str = "/v1/eval";
pub const DIGITS: &str = "/v1/digits";
pub const INTEGRATE: &str = "/v1/integrate";
pub const TREE: &str = "/v1/tree";
pub const BENCH: &str = "/v1/bench";
pub const FLOAT_DEMO: &str = "/v1/float-demo";
pub const HEALTH: &str = "/health";

/// Upper bound for precision, digit count, depth and repeat options.
pub const MAX_OPTION: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub expr: String,
    pub at: String,
    pub prec: u32,
    /// Also render the result as a decimal with this many places.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimal: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResponse {
    /// Canonical form of the evaluated expression.
    pub expr: String,
    pub value: String,
    /// Distance to the true value is at most `2^-prec`.
    pub prec: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitsRequest {
    pub expr: String,
    pub at: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitsResponse {
    pub expr: String,
    /// One of `N`, `Z`, `P` per digit.
    pub digits: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrateRequest {
    pub expr: String,
    pub prec: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrateResponse {
    pub expr: String,
    pub value: String,
    /// `2^(1-prec)` as a rational.
    pub error_bound: String,
    pub nodes_visited: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeFormat {
    #[default]
    Ascii,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRequest {
    pub expr: String,
    pub depth: u32,
    #[serde(default)]
    pub format: TreeFormat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeResponse {
    pub expr: String,
    pub render: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRequest {
    pub expr: String,
    pub at: String,
    pub prec: u32,
    pub repeat: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRun {
    pub wall_micros: u64,
    /// Tree nodes expanded during this run. Zero means the run was served
    /// entirely from the memo.
    pub expansions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchResponse {
    pub expr: String,
    pub value: String,
    pub runs: Vec<BenchRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloatDemoResponse {
    pub iterations: u32,
    pub start: String,
    /// binary64 result, labelled unverified.
    pub float: f64,
    pub exact: String,
    pub exact_prec: u32,
    pub exact_decimal: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Syntax,
    Range,
    Domain,
    Arity,
    BadRequest,
    ResourceLimit,
    Internal,
}

impl ErrorKind {
    /// Errors the caller can fix by changing the request.
    pub fn is_user_error(self) -> bool {
        !matches!(self, ErrorKind::ResourceLimit | ErrorKind::Internal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: ErrorKind,
    pub message: String,
    /// 1-based column in the expression, for syntax and range errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}
