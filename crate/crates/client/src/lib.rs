//! Async client for the sdreal HTTP service.

use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use url::Url;

pub use sdreal_proto::*;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service answered with an error body.
    #[error("{}", .0.message)]
    Api(ErrorBody),
    #[error("cannot reach service: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("invalid service url: {0}")]
    Url(#[from] url::ParseError),
    #[error("service answered {status}: {text}")]
    Unexpected { status: StatusCode, text: String },
}

impl ClientError {
    /// The service's error kind, if the service produced this error.
    pub fn kind(&self) -> Option<ErrorKind> {
        match self {
            ClientError::Api(b) => Some(b.kind),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: Url,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base: &str) -> Result<Client> {
        let mut base = Url::parse(base)?;
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        Ok(Client { base, http: reqwest::Client::new() })
    }

    pub fn base(&self) -> &Url {
        &self.base
    }

    async fn call<B: Serialize, T: DeserializeOwned>(&self, method: Method, route: &str, body: Option<&B>) -> Result<T> {
        let url = self.base.join(route.trim_start_matches('/'))?;
        let mut req = self.http.request(method, url);
        if let Some(b) = body {
            req = req.json(b);
        }
        let res = req.send().await?;
        let status = res.status();
        if status.is_success() {
            return Ok(res.json().await?);
        }
        let text = res.text().await?;
        match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) => Err(ClientError::Api(body)),
            Err(_) => Err(ClientError::Unexpected { status, text }),
        }
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, route: &str, body: &B) -> Result<T> {
        self.call(Method::POST, route, Some(body)).await
    }

    pub async fn eval(&self, req: &EvalRequest) -> Result<EvalResponse> {
        self.post(EVAL, req).await
    }

    pub async fn digits(&self, req: &DigitsRequest) -> Result<DigitsResponse> {
        self.post(DIGITS, req).await
    }

    pub async fn integrate(&self, req: &IntegrateRequest) -> Result<IntegrateResponse> {
        self.post(INTEGRATE, req).await
    }

    pub async fn tree(&self, req: &TreeRequest) -> Result<TreeResponse> {
        self.post(TREE, req).await
    }

    pub async fn bench(&self, req: &BenchRequest) -> Result<BenchResponse> {
        self.post(BENCH, req).await
    }

    pub async fn float_demo(&self) -> Result<FloatDemoResponse> {
        self.call::<(), _>(Method::GET, FLOAT_DEMO, None).await
    }

    pub async fn health(&self) -> Result<()> {
        let url = self.base.join(HEALTH.trim_start_matches('/'))?;
        let res = self.http.get(url).send().await?;
        if res.status().is_success() {
            Ok(())
        } else {
            let status = res.status();
            Err(ClientError::Unexpected { status, text: res.text().await? })
        }
    }
}
