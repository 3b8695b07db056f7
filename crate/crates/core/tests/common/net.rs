use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use makawalu::service::{ClientRole, ProtocolMessage, Snapshot};
use makawalu::state::StateEvent;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

const WAIT: Duration = Duration::from_secs(10);

pub struct WsClient {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl WsClient {
    pub async fn open(addr: SocketAddr) -> WsClient {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws"))
            .await
            .unwrap();
        WsClient { ws }
    }

    /// Open, say hello, and return the client with its welcome snapshot.
    pub async fn join(addr: SocketAddr, role: ClientRole) -> (WsClient, Snapshot) {
        let mut client = WsClient::open(addr).await;
        client
            .send(&ProtocolMessage::Hello {
                role,
                client_name: format!("{role:?}"),
            })
            .await;
        match client.recv().await {
            Some(ProtocolMessage::Welcome { snapshot, .. }) => (client, snapshot),
            other => panic!("expected welcome, got {other:?}"),
        }
    }

    pub async fn send(&mut self, message: &ProtocolMessage) {
        self.send_raw(&message.encode()).await;
    }

    pub async fn send_raw(&mut self, text: &str) {
        self.ws.send(Message::Text(text.to_string().into())).await.unwrap();
    }

    pub async fn event(&mut self, event: StateEvent) {
        self.send(&ProtocolMessage::Event { event }).await;
    }

    /// Next protocol message, or `None` once the server closes.
    pub async fn recv(&mut self) -> Option<ProtocolMessage> {
        loop {
            let next = tokio::time::timeout(WAIT, self.ws.next())
                .await
                .expect("server answered in time");
            match next {
                Some(Ok(Message::Text(text))) => return Some(ProtocolMessage::decode(&text).unwrap()),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return None,
                Some(Ok(_)) => continue,
            }
        }
    }

    pub async fn close(mut self) {
        let _ = self.ws.close(None).await;
    }
}

/// Send a raw HTTP/1.1 GET without any client-side path normalisation and
/// return the status code and body.
pub async fn raw_get(addr: SocketAddr, target: &str) -> (u16, Vec<u8>) {
    let mut stream = TcpStream::connect(addr).await.unwrap();
    let request = format!("GET {target} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n");
    stream.write_all(request.as_bytes()).await.unwrap();
    let mut response = Vec::new();
    tokio::time::timeout(WAIT, stream.read_to_end(&mut response))
        .await
        .expect("response in time")
        .unwrap();
    let text = String::from_utf8_lossy(&response);
    let status = text
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("no status line in {text:?}"));
    let body = match response.windows(4).position(|w| w == b"\r\n\r\n") {
        Some(i) => response[i + 4..].to_vec(),
        None => Vec::new(),
    };
    (status, body)
}

/// Traversal attempts against `/assets`; every one must be answered 403.
pub const TRAVERSAL_VECTORS: [&str; 9] = [
    "/assets/../project.json",
    "/assets/%2e%2e/project.json",
    "/assets/..%2fproject.json",
    "/assets/basemap/../../project.json",
    "/assets/%2e%2e%5cproject.json",
    "/assets//etc/passwd",
    "/assets/%2fetc%2fpasswd",
    "/assets/..",
    "/assets%2f..%2fproject.json",
];

/// Fifty scripted controller events touching every layer and event kind,
/// a few of which are rejected.
pub fn scripted_events() -> Vec<StateEvent> {
    use makawalu::state::{ElementId, ElementTransform};
    let mut events = Vec::new();
    let years = [1999, 2000, 2001, 2002, 1850];
    for i in 0..50u32 {
        let event = match i % 10 {
            0 => StateEvent::SelectLayer { id: "wildfire".into() },
            1 => StateEvent::SetYear {
                id: "wildfire".into(),
                year: years[(i / 10) as usize % 5],
            },
            2 => StateEvent::SetOpacity {
                id: "wildfire".into(),
                value: f64::from(i) / 50.0,
            },
            3 => StateEvent::SelectLayer { id: "solar".into() },
            4 => StateEvent::SetMonth {
                id: "solar".into(),
                month: i % 12 + 1,
            },
            5 => StateEvent::SetYear {
                id: "agriculture".into(),
                year: 2000 + i % 2,
            },
            6 => StateEvent::ToggleSublayer {
                id: "government".into(),
                index: (i / 10) as usize,
            },
            7 => StateEvent::SetTransform(ElementTransform {
                dx: f64::from(i) / 1000.0,
                sx: 1.0 + f64::from(i) / 100.0,
                ..ElementTransform::identity(ElementId::Basemap)
            }),
            8 => StateEvent::SetYear {
                id: "solar".into(),
                year: 2000,
            },
            _ => StateEvent::SetCalibrationLocked { flag: i % 20 == 9 },
        };
        events.push(event);
    }
    events
}

#[derive(Debug)]
pub struct Observed {
    pub versions: Vec<u64>,
    pub last_state: String,
}

/// Read snapshots until `final_version`, recording versions after `join`.
pub async fn observe_until(client: &mut WsClient, join: &Snapshot, final_version: u64) -> Result<Observed, String> {
    let mut versions = vec![join.version];
    let mut last_state = join.state.encode();
    while *versions.last().unwrap() < final_version {
        match client.recv().await {
            Some(ProtocolMessage::Snapshot(s)) => {
                versions.push(s.version);
                last_state = s.state.encode();
            }
            Some(ProtocolMessage::Rejected { .. }) => {}
            other => return Err(format!("unexpected {other:?}")),
        }
    }
    Ok(Observed { versions, last_state })
}

pub fn gapless(versions: &[u64]) -> bool {
    versions.windows(2).all(|w| w[1] == w[0] + 1)
}

/// Controller plus two displays see the scripted events; a third display
/// joins after event 25. All must see gapless versions and end identical.
pub async fn protocol_scenario(addr: SocketAddr) -> Result<String, String> {
    let (mut ctrl, ctrl_join) = WsClient::join(addr, ClientRole::Controller).await;
    let (mut d1, d1_join) = WsClient::join(addr, ClientRole::Display).await;
    let (mut d2, d2_join) = WsClient::join(addr, ClientRole::Display).await;

    let mut ctrl_versions = vec![ctrl_join.version];
    let mut ctrl_state = ctrl_join.state.encode();
    let mut late = None;
    let mut rejected = 0;
    for (n, event) in scripted_events().into_iter().enumerate() {
        ctrl.event(event).await;
        match ctrl.recv().await {
            Some(ProtocolMessage::Snapshot(s)) => {
                ctrl_versions.push(s.version);
                ctrl_state = s.state.encode();
            }
            Some(ProtocolMessage::Rejected { .. }) => rejected += 1,
            other => return Err(format!("controller got {other:?}")),
        }
        if n + 1 == 25 {
            late = Some(WsClient::join(addr, ClientRole::Display).await);
        }
    }
    let final_version = *ctrl_versions.last().unwrap();
    if !gapless(&ctrl_versions) {
        return Err(format!("controller versions have gaps: {ctrl_versions:?}"));
    }
    if final_version != ctrl_join.version + 50 - rejected {
        return Err(format!(
            "expected {} accepted events, final version {final_version}",
            50 - rejected
        ));
    }

    let (mut late_client, late_join) = late.unwrap();
    let mut observed = vec![
        ("display 1", observe_until(&mut d1, &d1_join, final_version).await?),
        ("display 2", observe_until(&mut d2, &d2_join, final_version).await?),
        (
            "late joiner",
            observe_until(&mut late_client, &late_join, final_version).await?,
        ),
    ];
    observed.push((
        "controller",
        Observed {
            versions: ctrl_versions,
            last_state: ctrl_state.clone(),
        },
    ));
    for (who, seen) in &observed {
        if !gapless(&seen.versions) || *seen.versions.last().unwrap() != final_version {
            return Err(format!("{who} saw versions {:?}", seen.versions));
        }
        if seen.last_state != ctrl_state {
            return Err(format!("{who} final state differs"));
        }
    }
    if late_join.version < 1 {
        return Err("late joiner was welcomed before any event".into());
    }
    for c in [ctrl, d1, d2, late_client] {
        c.close().await;
    }
    Ok(format!(
        "{} accepted, {rejected} rejected, late joiner welcomed at v{}",
        50 - rejected,
        late_join.version
    ))
}
