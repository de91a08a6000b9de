//! HTTP API over a loaded, immutable model.
//!
//! | route                        | body                                   |
//! |------------------------------|----------------------------------------|
//! | `GET  /api/model`            | variables, states, parents and CPTs    |
//! | `POST /api/infer`            | `{"evidence": {..}, "query": [..]}`    |
//! | `GET  /api/scenarios`        | list of scenario ids                   |
//! | `POST /api/scenarios/{name}` | scenario result                        |
//!
//! Every handler is a pure function of the request and the model, so the
//! server holds no mutable state.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;
use verdict_core::{
    infer_report, run_scenario, Cpt, Error, Evidence, InferReport, NamedScenario, Network,
    ScenarioResult,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferRequest {
    #[serde(default)]
    pub evidence: BTreeMap<String, String>,
    /// Defaults to every unobserved variable.
    #[serde(default)]
    pub query: Option<Vec<String>>,
}

pub type InferResponse = InferReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDescriptor {
    pub id: String,
    pub states: Vec<String>,
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub variables: Vec<VariableDescriptor>,
    pub cpts: Vec<Cpt>,
}

impl ModelDescriptor {
    pub fn of(net: &Network) -> Self {
        let variables = net
            .variables()
            .iter()
            .map(|v| VariableDescriptor {
                id: v.id().to_string(),
                states: v.states().to_vec(),
                parents: net
                    .cpt(v.id())
                    .map(|c| c.parents.clone())
                    .unwrap_or_default(),
            })
            .collect();
        ModelDescriptor {
            variables,
            cpts: net.cpts().to_vec(),
        }
    }
}

/// Error body: a message plus the request field at fault, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    fn bad_request(error: impl Into<String>, field: Option<String>) -> Self {
        ApiError {
            status: 400,
            error: error.into(),
            field,
        }
    }

    fn not_found(error: impl Into<String>) -> Self {
        ApiError {
            status: 404,
            error: error.into(),
            field: None,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::BAD_REQUEST);
        json_response(status, serde_json::to_vec(&self).expect("error serializes"))
    }
}

fn json_response(status: StatusCode, body: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

pub fn scenario_ids() -> Vec<&'static str> {
    NamedScenario::ALL.iter().map(|s| s.id()).collect()
}

fn parse_request(value: serde_json::Value) -> Result<InferRequest, ApiError> {
    let serde_json::Value::Object(fields) = value else {
        return Err(ApiError::bad_request(
            "request body must be a JSON object",
            None,
        ));
    };
    let mut req = InferRequest::default();
    for (key, v) in fields {
        let invalid = |e: serde_json::Error| {
            ApiError::bad_request(format!("invalid `{key}`: {e}"), Some(key.clone()))
        };
        match key.as_str() {
            "evidence" => req.evidence = serde_json::from_value(v).map_err(invalid)?,
            "query" => req.query = serde_json::from_value(v).map_err(invalid)?,
            _ => {
                return Err(ApiError::bad_request(
                    format!("unknown field `{key}`"),
                    Some(key),
                ))
            }
        }
    }
    Ok(req)
}

/// Validates and runs an inference request body.
pub fn handle_infer(net: &Network, body: &[u8]) -> Result<InferResponse, ApiError> {
    let value: serde_json::Value = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}"), None))?;
    let req = parse_request(value)?;

    let evidence: Evidence = req.evidence.into_iter().collect();
    if let Err(e) = evidence.resolve(net) {
        let field = match &e {
            Error::UnknownVariable(v) | Error::UnknownState { variable: v, .. } => {
                Some(format!("evidence.{v}"))
            }
            _ => Some("evidence".to_string()),
        };
        return Err(ApiError::bad_request(e.to_string(), field));
    }
    let query: Option<Vec<&str>> = req
        .query
        .as_ref()
        .map(|q| q.iter().map(String::as_str).collect());
    if let Some(q) = &query {
        if let Some(bad) = q.iter().find(|id| net.index_of(id).is_none()) {
            return Err(ApiError::bad_request(
                format!("unknown variable `{bad}`"),
                Some("query".into()),
            ));
        }
    }
    infer_report(net, &evidence, query.as_deref())
        .map_err(|e| ApiError::bad_request(e.to_string(), None))
}

pub fn handle_run_scenario(net: &Network, name: &str) -> Result<ScenarioResult, ApiError> {
    let scenario = NamedScenario::from_id(name).map_err(|e| ApiError::not_found(e.to_string()))?;
    run_scenario(net, &scenario.into()).map_err(|e| ApiError::bad_request(e.to_string(), None))
}

struct AppState {
    net: Network,
    model_body: Vec<u8>,
    scenarios_body: Vec<u8>,
}

async fn get_model(State(state): State<Arc<AppState>>) -> Response {
    json_response(StatusCode::OK, state.model_body.clone())
}

async fn post_infer(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    match handle_infer(&state.net, &body) {
        Ok(r) => json_response(StatusCode::OK, serde_json::to_vec(&r).expect("serializes")),
        Err(e) => e.into_response(),
    }
}

async fn get_scenarios(State(state): State<Arc<AppState>>) -> Response {
    json_response(StatusCode::OK, state.scenarios_body.clone())
}

async fn post_scenario(State(state): State<Arc<AppState>>, Path(name): Path<String>) -> Response {
    match handle_run_scenario(&state.net, &name) {
        Ok(r) => json_response(StatusCode::OK, serde_json::to_vec(&r).expect("serializes")),
        Err(e) => e.into_response(),
    }
}

/// Builds the application. When `ui_dir` is given its files are served at `/`.
pub fn router(net: Network, ui_dir: Option<PathBuf>) -> Router {
    let state = Arc::new(AppState {
        model_body: serde_json::to_vec(&ModelDescriptor::of(&net)).expect("serializes"),
        scenarios_body: serde_json::to_vec(&scenario_ids()).expect("serializes"),
        net,
    });
    let api = Router::new()
        .route("/api/model", get(get_model))
        .route("/api/infer", post(post_infer))
        .route("/api/scenarios", get(get_scenarios))
        .route("/api/scenarios/{name}", post(post_scenario))
        .with_state(state);
    let app = match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(net: Network, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(net, ui_dir)).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use verdict_core::{fit_default_model, LearningConfig};

    fn net() -> Network {
        fit_default_model(&LearningConfig::default()).unwrap()
    }

    #[test]
    fn malformed_json_is_400() {
        let e = handle_infer(&net(), b"{not json").unwrap_err();
        assert_eq!(e.status, 400);
        assert!(e.error.starts_with("malformed JSON"));
    }

    #[test]
    fn wrong_shape_names_the_field() {
        let e = handle_infer(&net(), br#"{"evidence": ["x"]}"#).unwrap_err();
        assert_eq!((e.status, e.field.as_deref()), (400, Some("evidence")));
        let e = handle_infer(&net(), br#"{"evidense": {}}"#).unwrap_err();
        assert_eq!((e.status, e.field.as_deref()), (400, Some("evidense")));
    }

    #[test]
    fn unknown_state_names_the_variable() {
        let e = handle_infer(&net(), br#"{"evidence": {"CaseOutcome": "banana"}}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("evidence.CaseOutcome"));
        assert!(e.error.contains("banana"));
        let e = handle_infer(&net(), br#"{"evidence": {}, "query": ["Nope"]}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("query"));
    }

    #[test]
    fn default_query_is_all_unobserved() {
        let r = handle_infer(&net(), br#"{"evidence": {"CaseOutcome": "won"}}"#).unwrap();
        assert_eq!(r.posteriors.len(), 8);
        assert!(!r.posteriors.contains_key("CaseOutcome"));
    }

    #[test]
    fn unknown_scenario_is_404() {
        assert_eq!(handle_run_scenario(&net(), "nope").unwrap_err().status, 404);
    }
}
