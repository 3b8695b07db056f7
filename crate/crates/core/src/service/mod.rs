//! The presenter service: loads a validated project, owns the authoritative
//! state, serves the manifest and assets over HTTP, and keeps controller and
//! display clients in sync over `/ws`.
//!
//! Endpoints:
//!
//! | path            | body                                     |
//! |-----------------|------------------------------------------|
//! | `/api/project`  | canonical `project.json`                 |
//! | `/api/state`    | `{"version", "state"}` snapshot          |
//! | `/api/draw-list`| resolved draw list of the current state  |
//! | `/assets/<p>`   | bytes of `assets/<p>`; 403 outside it    |
//! | `/healthz`      | `{"status": "ok", "version": n}`         |
//! | `/`, `/display` | controller and projection pages          |
//! | `/ws`           | JSON [`ProtocolMessage`] text frames     |

mod hub;
mod protocol;
mod settings;

use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::{header, StatusCode, Uri};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tracing::{info, warn};

pub use hub::{ClientId, Hub, Outbox};
pub use protocol::{ClientRole, ProtocolMessage, Snapshot};
pub use settings::{
    apply_settings, load_settings, persist_settings, settings_path, PresenterSettings, SettingsError, SETTINGS_FILE,
};

use crate::error::ProjectError;
use crate::model::check_relative_path;
use crate::project::{decode_image, load_project, LoadedProject, ASSETS_DIR};
use crate::report::ValidationReport;
use crate::state::{initial_state, resolve_draw_list, RejectCode};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("refusing to present an invalid project:\n{0}")]
    InvalidProject(ValidationReport),
    #[error(transparent)]
    Project(ProjectError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    /// Folder holding a built controller/display UI (`index.html`,
    /// `display.html`, and anything they load under `/ui/`). Without it the
    /// service serves minimal built-in pages.
    pub ui_dir: Option<PathBuf>,
}

struct AppState {
    project: LoadedProject,
    manifest_json: String,
    hub: Arc<Hub>,
    assets_root: PathBuf,
    ui_dir: Option<PathBuf>,
}

/// A running service. Dropping it does not stop the server; call
/// [`RunningPresenter::shutdown`].
pub struct RunningPresenter {
    addr: SocketAddr,
    hub: Arc<Hub>,
    warnings: Vec<String>,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<io::Result<()>>,
}

impl RunningPresenter {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn hub(&self) -> &Arc<Hub> {
        &self.hub
    }

    /// Problems tolerated at startup, such as a corrupt settings file.
    pub fn startup_warnings(&self) -> &[String] {
        &self.warnings
    }

    pub async fn shutdown(mut self) -> io::Result<()> {
        self.hub.disconnect_all();
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.unwrap_or_else(|e| Err(io::Error::other(e)))
    }

    /// Run until the server stops on its own.
    pub async fn wait(self) -> io::Result<()> {
        let _keep = self.shutdown;
        self.task.await.unwrap_or_else(|e| Err(io::Error::other(e)))
    }
}

/// Initial presenter state for `project` with any saved layout applied,
/// plus warnings for anything in the settings file that was ignored.
pub fn startup_state(project: &LoadedProject) -> (crate::state::PresenterState, Vec<String>) {
    let initial = initial_state(&project.manifest);
    match load_settings(&project.root) {
        Ok(None) => (initial, Vec::new()),
        Ok(Some(saved)) => apply_settings(&initial, &saved, &project.manifest),
        Err(e) => (initial, vec![format!("{e}; using the default layout")]),
    }
}

/// Validate and load `project_root`, then listen on `bind`.
pub async fn serve(
    project_root: impl AsRef<Path>,
    bind: &str,
    options: ServeOptions,
) -> Result<RunningPresenter, ServeError> {
    let project = match load_project(project_root.as_ref()) {
        Ok(p) => p,
        Err(ProjectError::Invalid(report)) => return Err(ServeError::InvalidProject(report)),
        Err(e) => return Err(ServeError::Project(e)),
    };
    let (state, warnings) = startup_state(&project);
    for w in &warnings {
        warn!("{w}");
    }

    let listener = TcpListener::bind(bind).await.map_err(|source| ServeError::Bind {
        addr: bind.to_string(),
        source,
    })?;
    let addr = listener.local_addr().map_err(|source| ServeError::Bind {
        addr: bind.to_string(),
        source,
    })?;

    let manifest = Arc::new(project.manifest.clone());
    let hub = Arc::new(Hub::new(manifest, state, Some(project.root.clone())));
    let assets_root = project.root.join(ASSETS_DIR);
    let app_state = Arc::new(AppState {
        manifest_json: project.canonical_manifest(),
        assets_root: std::fs::canonicalize(&assets_root).unwrap_or(assets_root),
        project,
        hub: hub.clone(),
        ui_dir: options.ui_dir,
    });

    let (tx, rx) = oneshot::channel::<()>();
    let app = router(app_state);
    info!("presenter listening on http://{addr}");
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });

    Ok(RunningPresenter {
        addr,
        hub,
        warnings,
        shutdown: Some(tx),
        task,
    })
}

fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/project", get(get_project))
        .route("/api/state", get(get_state))
        .route("/api/draw-list", get(get_draw_list))
        .route("/healthz", get(healthz))
        .route("/", get(controller_page))
        .route("/display", get(display_page))
        .route("/ws", get(ws_upgrade))
        .fallback(fallback)
        .with_state(state)
}

async fn get_project(State(app): State<Arc<AppState>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], app.manifest_json.clone()).into_response()
}

async fn get_state(State(app): State<Arc<AppState>>) -> Json<Snapshot> {
    Json(Snapshot::of(&app.hub.snapshot()))
}

async fn get_draw_list(State(app): State<Arc<AppState>>) -> Response {
    let state = app.hub.snapshot();
    Json(resolve_draw_list(&state, &app.project.manifest)).into_response()
}

async fn healthz(State(app): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": app.hub.snapshot().version }))
}

fn status(code: StatusCode) -> Response {
    (code, code.canonical_reason().unwrap_or_default().to_string()).into_response()
}

/// Resolve the part of a request path after `/assets/` to a file inside the
/// assets folder. `Err` carries the response status.
fn resolve_asset(assets_root: &Path, raw: &str) -> Result<PathBuf, StatusCode> {
    let decoded = percent_encoding::percent_decode_str(raw)
        .decode_utf8()
        .map_err(|_| StatusCode::FORBIDDEN)?;
    if check_relative_path(&decoded).is_err() {
        return Err(StatusCode::FORBIDDEN);
    }
    let real = match std::fs::canonicalize(assets_root.join(decoded.as_ref())) {
        Ok(real) => real,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StatusCode::NOT_FOUND),
        Err(_) => return Err(StatusCode::FORBIDDEN),
    };
    if !real.starts_with(assets_root) {
        return Err(StatusCode::FORBIDDEN);
    }
    if !real.is_file() {
        return Err(StatusCode::NOT_FOUND);
    }
    Ok(real)
}

fn content_type_for(bytes: &[u8]) -> &'static str {
    match decode_image(bytes) {
        Ok((kind, _)) => kind.content_type(),
        Err(_) => "application/octet-stream",
    }
}

async fn fallback(State(app): State<Arc<AppState>>, uri: Uri) -> Response {
    let path = uri.path();
    if let Some(rest) = path.strip_prefix("/assets/") {
        return serve_file(resolve_asset(&app.assets_root, rest), true).await;
    }
    if let (Some(rest), Some(ui)) = (path.strip_prefix("/ui/"), &app.ui_dir) {
        let ui = std::fs::canonicalize(ui).unwrap_or_else(|_| ui.clone());
        return serve_file(resolve_asset(&ui, rest), false).await;
    }
    if path.starts_with("/assets") {
        return status(StatusCode::FORBIDDEN);
    }
    status(StatusCode::NOT_FOUND)
}

async fn serve_file(resolved: Result<PathBuf, StatusCode>, image: bool) -> Response {
    let path = match resolved {
        Ok(p) => p,
        Err(code) => return status(code),
    };
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let content_type = if image {
                content_type_for(&bytes)
            } else {
                ui_content_type(&path)
            };
            ([(header::CONTENT_TYPE, content_type)], Body::from(bytes)).into_response()
        }
        Err(_) => status(StatusCode::NOT_FOUND),
    }
}

fn ui_content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

async fn ui_page(app: &AppState, file: &str, fallback_role: ClientRole) -> Response {
    if let Some(dir) = &app.ui_dir {
        if let Ok(html) = tokio::fs::read_to_string(dir.join(file)).await {
            return Html(html).into_response();
        }
    }
    Html(builtin_page(&app.project.manifest.project.name, fallback_role)).into_response()
}

async fn controller_page(State(app): State<Arc<AppState>>) -> Response {
    ui_page(&app, "index.html", ClientRole::Controller).await
}

async fn display_page(State(app): State<Arc<AppState>>) -> Response {
    ui_page(&app, "display.html", ClientRole::Display).await
}

fn builtin_page(title: &str, role: ClientRole) -> String {
    let role = match role {
        ClientRole::Controller => "controller",
        ClientRole::Display => "display",
    };
    let title = title.replace('&', "&amp;").replace('<', "&lt;");
    format!(
        r#"<!doctype html>
<html><head><meta charset="utf-8"><title>{title} ({role})</title></head>
<body>
<h1>{title}</h1>
<p>Presenter {role} surface. Serve a built UI with <code>--ui-dir</code>.</p>
<pre id="state">connecting</pre>
<script>
const ws = new WebSocket(`ws://${{location.host}}/ws`);
ws.onopen = () => ws.send(JSON.stringify({{type: "hello", role: "{role}", client_name: "builtin"}}));
ws.onmessage = (m) => {{
  const msg = JSON.parse(m.data);
  const snap = msg.type === "welcome" ? msg.snapshot : msg;
  if (snap.state) document.getElementById("state").textContent = JSON.stringify(snap, null, 2);
}};
</script>
</body></html>
"#
    )
}

async fn ws_upgrade(State(app): State<Arc<AppState>>, ws: WebSocketUpgrade) -> Response {
    let hub = app.hub.clone();
    ws.on_upgrade(move |socket| client_session(socket, hub))
}

async fn client_session(socket: WebSocket, hub: Arc<Hub>) {
    let (mut sink, mut stream) = socket.split();

    let hello = loop {
        match stream.next().await {
            Some(Ok(Message::Text(text))) => break ProtocolMessage::decode(&text),
            Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
            _ => return,
        }
    };
    let role = match hello {
        Ok(ProtocolMessage::Hello { role, .. }) => role,
        other => {
            let detail = match other {
                Ok(_) => "first message must be hello".to_string(),
                Err(e) => format!("malformed hello: {e}"),
            };
            let rejected = ProtocolMessage::Rejected {
                reason_code: RejectCode::ProtocolError,
                message: detail,
            };
            let _ = sink.send(Message::Text(rejected.encode().into())).await;
            let _ = sink.close().await;
            return;
        }
    };

    let (id, mut outbox) = hub.connect(role);
    let writer = tokio::spawn(async move {
        while let Some(frame) = outbox.recv().await {
            if sink.send(Message::Text(frame.as_ref().into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    while let Some(incoming) = stream.next().await {
        let text = match incoming {
            Ok(Message::Text(text)) => text,
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        match ProtocolMessage::decode(&text) {
            Ok(ProtocolMessage::Event { event }) => {
                let _ = hub.submit(id, &event);
            }
            Ok(ProtocolMessage::Ping) => hub.pong(id),
            Ok(other) => hub.reject(
                id,
                RejectCode::ProtocolError,
                format!("clients may send event or ping, not {}", kind_name(&other)),
            ),
            Err(e) => hub.reject(id, RejectCode::ProtocolError, format!("malformed message: {e}")),
        }
    }

    hub.disconnect(id);
    let _ = writer.await;
}

fn kind_name(message: &ProtocolMessage) -> &'static str {
    match message {
        ProtocolMessage::Hello { .. } => "hello",
        ProtocolMessage::Welcome { .. } => "welcome",
        ProtocolMessage::Event { .. } => "event",
        ProtocolMessage::Snapshot(_) => "snapshot",
        ProtocolMessage::Rejected { .. } => "rejected",
        ProtocolMessage::Ping => "ping",
        ProtocolMessage::Pong => "pong",
    }
}
