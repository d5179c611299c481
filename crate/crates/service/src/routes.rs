use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use gpsurr_core::dataset::is_design_feature;
use serde::de::DeserializeOwned;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::api::*;
use crate::error::ApiError;
use crate::registry::ModelRegistry;

/// Shared server state: empty until the registry is installed.
#[derive(Debug, Default)]
pub struct AppState {
    registry: OnceLock<ModelRegistry>,
}

impl AppState {
    pub fn new() -> Arc<Self> {
        Arc::new(AppState::default())
    }

    pub fn ready(registry: ModelRegistry) -> Arc<Self> {
        let s = AppState::new();
        s.install(registry);
        s
    }

    /// Marks the server ready. Later calls are ignored.
    pub fn install(&self, registry: ModelRegistry) {
        if self.registry.set(registry).is_err() {
            log::warn!("model registry already installed; ignoring");
        }
    }

    pub fn registry(&self) -> Option<&ModelRegistry> {
        self.registry.get()
    }
}

type Shared = Arc<AppState>;

fn registry(state: &AppState) -> Result<&ModelRegistry, ApiError> {
    state.registry().ok_or_else(ApiError::not_ready)
}

/// Parses a JSON body, naming the offending field on failure.
fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        use serde_json::error::Category;
        match inner.classify() {
            Category::Syntax | Category::Eof | Category::Io => ApiError::new(
                StatusCode::BAD_REQUEST,
                "malformed_json",
                inner.to_string(),
            ),
            Category::Data => {
                let msg = inner.to_string();
                let field = match msg.split('`').nth(1) {
                    Some(name) if msg.starts_with("missing field") => {
                        if path == "." { name.to_string() } else { format!("{path}.{name}") }
                    }
                    Some(name) if msg.starts_with("unknown field") => {
                        if path == "." { name.to_string() } else { path.clone() }
                    }
                    _ => path,
                };
                ApiError::field(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", &field, msg)
            }
        }
    })
}

async fn healthz(State(state): State<Shared>) -> Result<Json<Health>, ApiError> {
    let reg = registry(&state)?;
    Ok(Json(Health { status: "ok".into(), models_loaded: reg.len() }))
}

async fn list_models(State(state): State<Shared>) -> Result<Json<Vec<ModelInfo>>, ApiError> {
    Ok(Json(registry(&state)?.infos()))
}

/// Runs CPU-bound prediction off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

async fn predict_profile(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ProfileResponse>, ApiError> {
    registry(&state)?.get(&id).ok_or_else(|| ApiError::unknown_model(&id))?;
    let req: ProfileRequest = parse_body(&body)?;
    let grid = req.sweep.grid()?;
    blocking(move || {
        let entry = registry(&state)?.get(&id).ok_or_else(|| ApiError::unknown_model(&id))?;
        let p = entry.model.predict_profile(&req.fixed, &req.sweep.feature, &grid, req.z)?;
        Ok(Json(ProfileResponse::new(&id, p)))
    })
    .await
}

async fn back_predict(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<BackPredictResponse>, ApiError> {
    let entry = registry(&state)?.get(&id).ok_or_else(|| ApiError::unknown_model(&id))?;
    let target = entry.model.target_name().to_string();
    if !is_design_feature(&target) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "not_inverse_model",
            format!("model '{id}' predicts '{target}', which is not a design parameter"),
        ));
    }
    let req: BackPredictRequest = parse_body(&body)?;
    if !(req.z >= 0.0 && req.z.is_finite()) {
        return Err(ApiError::field(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_field",
            "z",
            format!("z must be >= 0, got {}", req.z),
        ));
    }
    blocking(move || {
        let entry = registry(&state)?.get(&id).ok_or_else(|| ApiError::unknown_model(&id))?;
        let p = entry.model.predict_features(&req.fixed)?;
        let half = p.variance.map(|v| req.z * v.sqrt());
        Ok(Json(BackPredictResponse {
            model_id: id,
            target_name: target,
            mean: p.mean,
            variance: p.variance,
            ci_lower: half.map(|h| p.mean - h),
            ci_upper: half.map(|h| p.mean + h),
            z: req.z,
        }))
    })
    .await
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

/// Builds the router. `cors_origin` of `*` allows any origin.
pub fn router(state: Shared, cors_origin: Option<&str>) -> Result<Router, String> {
    let mut app = Router::new()
        .route("/healthz", get(healthz))
        .route("/models", get(list_models))
        .route("/models/{id}/predict-profile", post(predict_profile))
        .route("/models/{id}/back-predict", post(back_predict))
        .fallback(not_found)
        .with_state(state);
    if let Some(origin) = cors_origin {
        let allow = if origin == "*" {
            AllowOrigin::any()
        } else {
            let v = HeaderValue::from_str(origin).map_err(|e| format!("bad CORS origin: {e}"))?;
            AllowOrigin::exact(v)
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(allow)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([axum::http::header::CONTENT_TYPE]),
        );
    }
    Ok(app)
}
