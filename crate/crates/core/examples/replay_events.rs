//! Drive the presenter state machine by hand and print what the display
//! would draw after each event.
//!
//! cargo run --example replay_events

use makawalu::demo::oahu_demo;
use makawalu::state::{apply_event, initial_state, resolve_draw_list, StateEvent};

fn main() {
    let (manifest, _) = oahu_demo();
    let script = [
        r#"{"type":"select_layer","id":"agriculture"}"#,
        r#"{"type":"set_year","id":"agriculture","year":2001}"#,
        r#"{"type":"set_month","id":"agriculture","month":1}"#,
        r#"{"type":"set_month","id":"agriculture","month":9}"#,
        r#"{"type":"set_opacity","id":"agriculture","value":0.4}"#,
        r#"{"type":"select_layer","id":"lava"}"#,
        r#"{"type":"select_layer","id":"government"}"#,
        r#"{"type":"toggle_sublayer","id":"government","index":2}"#,
    ];

    let mut state = initial_state(&manifest);
    for line in script {
        let event: StateEvent = serde_json::from_str(line).expect("scripted event parses");
        match apply_event(&state, &event, &manifest) {
            Ok(next) => {
                state = next;
                let list = resolve_draw_list(&state, &manifest);
                let drawn: Vec<String> = list
                    .entries
                    .iter()
                    .map(|e| format!("{}@{:.2}", e.image, e.opacity))
                    .collect();
                println!("v{:<2} {line}\n    draws {}", state.version, drawn.join(" + "));
            }
            Err(rejection) => println!(
                "rejected {line}\n    {}: {}",
                rejection.code.as_str(),
                rejection.message
            ),
        }
    }
}
