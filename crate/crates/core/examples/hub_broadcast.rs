//! Use the single-writer hub without a network: one controller, one display,
//! and the messages each receives.
//!
//! cargo run --example hub_broadcast

use std::sync::Arc;

use makawalu::demo::oahu_demo;
use makawalu::service::{ClientRole, Hub};
use makawalu::state::{initial_state, StateEvent};

fn main() {
    let (manifest, _) = oahu_demo();
    let state = initial_state(&manifest);
    let hub = Hub::new(Arc::new(manifest), state, None);
    let (ctrl, mut ctrl_box) = hub.connect(ClientRole::Controller);
    let (display, mut display_box) = hub.connect(ClientRole::Display);

    let _ = hub.submit(ctrl, &StateEvent::SelectLayer { id: "wildfire".into() });
    let _ = hub.submit(
        ctrl,
        &StateEvent::SetYear {
            id: "wildfire".into(),
            year: 1850,
        },
    );
    let _ = hub.submit(display, &StateEvent::SelectLayer { id: "solar".into() });

    for (who, outbox) in [("controller", &mut ctrl_box), ("display", &mut display_box)] {
        println!("{who}:");
        while let Ok(message) = outbox.try_recv() {
            let shown: String = message.chars().take(110).collect();
            println!("  {shown}");
        }
    }
}
