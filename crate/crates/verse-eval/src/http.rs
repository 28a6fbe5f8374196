//! Thin JSON-over-HTTP helpers on top of `ureq`.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;
use verse_eval_core::ProviderError;

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .build()
        .into()
}

/// 5xx and connection-level failures are transport errors (retried);
/// everything else breaks the contract.
fn classify(url: &str, err: ureq::Error) -> ProviderError {
    match err {
        ureq::Error::StatusCode(code) if code >= 500 || code == 429 => {
            ProviderError::transport(format!("{url}: HTTP {code}"))
        }
        ureq::Error::StatusCode(code) => ProviderError::protocol(format!("{url}: HTTP {code}")),
        ureq::Error::Json(e) => {
            ProviderError::protocol(format!("{url}: invalid JSON response: {e}"))
        }
        other => ProviderError::transport(format!("{url}: {other}")),
    }
}

pub(crate) fn join(endpoint: &str, path: &str) -> String {
    format!(
        "{}/{}",
        endpoint.trim_end_matches('/'),
        path.trim_start_matches('/')
    )
}

pub(crate) fn post_json<B: Serialize, T: DeserializeOwned>(
    agent: &ureq::Agent,
    url: &str,
    body: &B,
) -> Result<T, ProviderError> {
    agent
        .post(url)
        .send_json(body)
        .and_then(|mut r| r.body_mut().read_json::<T>())
        .map_err(|e| classify(url, e))
}

pub(crate) fn get_json<T: DeserializeOwned>(
    agent: &ureq::Agent,
    url: &str,
) -> Result<T, ProviderError> {
    agent
        .get(url)
        .call()
        .and_then(|mut r| r.body_mut().read_json::<T>())
        .map_err(|e| classify(url, e))
}
