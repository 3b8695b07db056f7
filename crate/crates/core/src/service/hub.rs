//! The single writer. All event application, broadcast fan-out and client
//! registration happen under one lock, so every client sees the same total
//! order of snapshots with no gaps after its welcome.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use tokio::sync::mpsc;
use tracing::warn;

use super::protocol::{ClientRole, ProtocolMessage, Snapshot};
use super::settings::persist_settings;
use crate::model::ProjectManifest;
use crate::state::{apply_event, PresenterState, RejectCode, Rejection, StateEvent};

pub type ClientId = u64;

/// Pre-encoded outgoing frames; one encoding is shared by every recipient.
pub type Outbox = mpsc::UnboundedReceiver<Arc<str>>;

struct Client {
    role: ClientRole,
    tx: mpsc::UnboundedSender<Arc<str>>,
}

struct Inner {
    state: Arc<PresenterState>,
    clients: BTreeMap<ClientId, Client>,
    next_id: ClientId,
}

pub struct Hub {
    manifest: Arc<ProjectManifest>,
    settings_root: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl Hub {
    /// `settings_root`: where layout changes are persisted, if anywhere.
    pub fn new(manifest: Arc<ProjectManifest>, state: PresenterState, settings_root: Option<PathBuf>) -> Self {
        Hub {
            manifest,
            settings_root,
            inner: Mutex::new(Inner {
                state: Arc::new(state),
                clients: BTreeMap::new(),
                next_id: 1,
            }),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn manifest(&self) -> &ProjectManifest {
        &self.manifest
    }

    pub fn snapshot(&self) -> Arc<PresenterState> {
        self.lock().state.clone()
    }

    pub fn client_count(&self) -> usize {
        self.lock().clients.len()
    }

    /// Register a client. Its outbox starts with the welcome for the current
    /// state; every later broadcast follows in order.
    pub fn connect(&self, role: ClientRole) -> (ClientId, Outbox) {
        let mut inner = self.lock();
        let id = inner.next_id;
        inner.next_id += 1;
        let (tx, rx) = mpsc::unbounded_channel();
        let welcome = ProtocolMessage::Welcome {
            client_id: format!("c{id}"),
            snapshot: Snapshot::of(&inner.state),
        };
        let _ = tx.send(welcome.encode().into());
        inner.clients.insert(id, Client { role, tx });
        (id, rx)
    }

    pub fn disconnect(&self, id: ClientId) {
        self.lock().clients.remove(&id);
    }

    /// Drop every client; their sessions close once their outboxes drain.
    pub fn disconnect_all(&self) {
        self.lock().clients.clear();
    }

    fn send_to(inner: &Inner, id: ClientId, message: &ProtocolMessage) {
        if let Some(client) = inner.clients.get(&id) {
            let _ = client.tx.send(message.encode().into());
        }
    }

    pub fn reject(&self, id: ClientId, code: RejectCode, message: impl Into<String>) {
        let inner = self.lock();
        Self::send_to(
            &inner,
            id,
            &ProtocolMessage::Rejected {
                reason_code: code,
                message: message.into(),
            },
        );
    }

    pub fn pong(&self, id: ClientId) {
        Self::send_to(&self.lock(), id, &ProtocolMessage::Pong);
    }

    /// Apply an event from a connected client. Accepted events broadcast the
    /// new snapshot to everyone; rejections go back to the sender only.
    pub fn submit(&self, id: ClientId, event: &StateEvent) -> Result<u64, Rejection> {
        let mut inner = self.lock();
        let outcome = match inner.clients.get(&id).map(|c| c.role) {
            Some(ClientRole::Controller) => apply_event(&inner.state, event, &self.manifest),
            Some(ClientRole::Display) => Err(Rejection {
                code: RejectCode::ReadOnlyRole,
                message: "display clients cannot change the presentation".into(),
            }),
            None => Err(Rejection {
                code: RejectCode::ProtocolError,
                message: "client is not connected".into(),
            }),
        };
        match outcome {
            Ok(next) => {
                let version = next.version;
                inner.state = Arc::new(next);
                self.persist_if_layout(event, &inner.state);
                let frame: Arc<str> = ProtocolMessage::Snapshot(Snapshot::of(&inner.state)).encode().into();
                for client in inner.clients.values() {
                    let _ = client.tx.send(frame.clone());
                }
                Ok(version)
            }
            Err(rejection) => {
                Self::send_to(
                    &inner,
                    id,
                    &ProtocolMessage::Rejected {
                        reason_code: rejection.code,
                        message: rejection.message.clone(),
                    },
                );
                Err(rejection)
            }
        }
    }

    fn persist_if_layout(&self, event: &StateEvent, state: &PresenterState) {
        let Some(root) = &self.settings_root else {
            return;
        };
        if event.touches_layout() {
            if let Err(e) = persist_settings(root, state) {
                warn!("could not persist presenter settings: {e}");
            }
        }
    }
}
