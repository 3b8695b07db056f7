//! Socket messages. Each WebSocket text frame carries one JSON object whose
//! `type` field names the message kind.

use serde::{Deserialize, Serialize};

use crate::state::{PresenterState, RejectCode, StateEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClientRole {
    /// Touchscreen surface; may send events.
    Controller,
    /// Projection surface; read-only.
    Display,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u64,
    pub state: PresenterState,
}

impl Snapshot {
    pub fn of(state: &PresenterState) -> Snapshot {
        Snapshot {
            version: state.version,
            state: state.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProtocolMessage {
    Hello { role: ClientRole, client_name: String },
    Welcome { client_id: String, snapshot: Snapshot },
    Event { event: StateEvent },
    Snapshot(Snapshot),
    Rejected { reason_code: RejectCode, message: String },
    Ping,
    Pong,
}

impl ProtocolMessage {
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("protocol messages always serialize")
    }

    pub fn decode(text: &str) -> Result<ProtocolMessage, serde_json::Error> {
        serde_json::from_str(text)
    }
}
