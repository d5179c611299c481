//! HTTP front end for saved surrogate models.
//!
//! Models are read once at startup from a directory of model files (the
//! model id is the file stem). Until loading finishes every endpoint
//! answers 503. Endpoints:
//!
//! - `GET /healthz`
//! - `GET /models`
//! - `POST /models/{id}/predict-profile`
//! - `POST /models/{id}/back-predict`

pub mod api;
pub mod error;
pub mod registry;
pub mod routes;

use std::future::Future;
use std::path::PathBuf;

use tokio::net::TcpListener;

pub use registry::{ModelRegistry, RegistryError};
pub use routes::{router, AppState};

#[derive(Debug, Clone, PartialEq)]
pub struct ServeConfig {
    pub models_dir: PathBuf,
    pub host: String,
    pub port: u16,
    pub cors_origin: Option<String>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            models_dir: PathBuf::from("models"),
            host: "127.0.0.1".into(),
            port: 8080,
            cors_origin: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("{0}")]
    Config(String),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Binds `host:port` and serves until Ctrl-C.
pub async fn serve(cfg: ServeConfig) -> Result<(), ServeError> {
    let addr = format!("{}:{}", cfg.host, cfg.port);
    let listener = TcpListener::bind(&addr)
        .await
        .map_err(|source| ServeError::Bind { addr: addr.clone(), source })?;
    log::info!("listening on {}", listener.local_addr()?);
    serve_on(listener, cfg, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves on an already bound listener. Requests are accepted (and answered
/// 503) while the model directory loads; a load failure stops the server
/// and is returned.
pub async fn serve_on(
    listener: TcpListener,
    cfg: ServeConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let state = AppState::new();
    let app = router(state.clone(), cfg.cors_origin.as_deref()).map_err(ServeError::Config)?;
    let server = tokio::spawn(async move {
        axum::serve(listener, app).with_graceful_shutdown(shutdown).await
    });
    let dir = cfg.models_dir.clone();
    let loaded = tokio::task::spawn_blocking(move || ModelRegistry::load_dir(&dir))
        .await
        .map_err(|e| ServeError::Config(e.to_string()))?;
    match loaded {
        Ok(reg) => {
            log::info!("{} model(s) loaded; ready", reg.len());
            state.install(reg);
        }
        Err(e) => {
            log::error!("{e}");
            server.abort();
            return Err(e.into());
        }
    }
    server.await.map_err(|e| ServeError::Config(e.to_string()))??;
    Ok(())
}
