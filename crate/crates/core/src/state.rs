//! Presenter runtime state and its pure transition function.
//!
//! [`apply_event`] never mutates its input; an accepted event yields a new
//! state with `version + 1`, a rejected one leaves the caller's state as it
//! was. [`resolve_draw_list`] turns a state into the ordered images the
//! projection must show.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{months_of, years_of, DataLayer, ProjectManifest, TimeFormat, TimeKey};

/// Target of a calibration transform: the basemap or one data layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ElementId {
    Basemap,
    Layer(String),
}

impl ElementId {
    pub fn layer(id: impl Into<String>) -> Self {
        ElementId::Layer(id.into())
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Basemap => f.write_str("basemap"),
            ElementId::Layer(id) => write!(f, "layer:{id}"),
        }
    }
}

impl From<ElementId> for String {
    fn from(id: ElementId) -> Self {
        id.to_string()
    }
}

impl TryFrom<String> for ElementId {
    type Error = String;

    fn try_from(raw: String) -> Result<Self, Self::Error> {
        if raw == "basemap" {
            return Ok(ElementId::Basemap);
        }
        match raw.strip_prefix("layer:") {
            Some(id) if !id.is_empty() => Ok(ElementId::Layer(id.to_string())),
            _ => Err(format!("element id {raw:?} must be \"basemap\" or \"layer:<id>\"")),
        }
    }
}

/// Move/resize of one element in canvas-fraction units. Scaling is about the
/// canvas center; translation is applied after scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementTransform {
    pub element_id: ElementId,
    pub dx: f64,
    pub dy: f64,
    pub sx: f64,
    pub sy: f64,
}

impl ElementTransform {
    pub fn identity(element_id: ElementId) -> Self {
        ElementTransform {
            element_id,
            dx: 0.0,
            dy: 0.0,
            sx: 1.0,
            sy: 1.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0 && self.sx == 1.0 && self.sy == 1.0
    }

    fn is_well_formed(&self) -> bool {
        self.dx.is_finite()
            && self.dy.is_finite()
            && self.sx.is_finite()
            && self.sy.is_finite()
            && self.sx > 0.0
            && self.sy > 0.0
    }
}

/// Mode-specific time cursor of a layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Cursor {
    /// Static layers: the set of toggled-on sublayer indices.
    None {
        active: BTreeSet<usize>,
    },
    Month {
        month: Option<u32>,
    },
    Year {
        year: Option<u32>,
    },
    YearMonth {
        year: Option<u32>,
        month: Option<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRuntime {
    pub visible: bool,
    pub opacity: f64,
    pub cursor: Cursor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresenterState {
    pub version: u64,
    pub selected_layer: Option<String>,
    pub runtimes: BTreeMap<String, LayerRuntime>,
    pub transforms: BTreeMap<ElementId, ElementTransform>,
    pub calibration_locked: bool,
}

impl PresenterState {
    /// Compact JSON; identical states always encode to identical bytes.
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("presenter state always serializes")
    }

    pub fn transform(&self, element: &ElementId) -> ElementTransform {
        self.transforms
            .get(element)
            .cloned()
            .unwrap_or_else(|| ElementTransform::identity(element.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateEvent {
    SelectLayer { id: String },
    SetLayerVisible { id: String, visible: bool },
    ToggleSublayer { id: String, index: usize },
    SetMonth { id: String, month: u32 },
    SetYear { id: String, year: u32 },
    SetOpacity { id: String, value: f64 },
    SetTransform(ElementTransform),
    ResetLayout,
    SetCalibrationLocked { flag: bool },
}

impl StateEvent {
    /// Whether accepting this event changes the persisted layout.
    pub fn touches_layout(&self) -> bool {
        matches!(
            self,
            StateEvent::SetTransform(_) | StateEvent::ResetLayout | StateEvent::SetCalibrationLocked { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectCode {
    UnknownLayer,
    WrongEventKind,
    OutOfRange,
    NonexistentTimeKey,
    CalibrationLocked,
    InvalidValue,
    ReadOnlyRole,
    ProtocolError,
}

impl RejectCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectCode::UnknownLayer => "unknown_layer",
            RejectCode::WrongEventKind => "wrong_event_kind",
            RejectCode::OutOfRange => "out_of_range",
            RejectCode::NonexistentTimeKey => "nonexistent_time_key",
            RejectCode::CalibrationLocked => "calibration_locked",
            RejectCode::InvalidValue => "invalid_value",
            RejectCode::ReadOnlyRole => "read_only_role",
            RejectCode::ProtocolError => "protocol_error",
        }
    }
}

impl fmt::Display for RejectCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub code: RejectCode,
    pub message: String,
}

impl Rejection {
    fn new(code: RejectCode, message: impl Into<String>) -> Self {
        Rejection {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for Rejection {}

fn initial_cursor(layer: &DataLayer) -> Cursor {
    match layer.time_format {
        TimeFormat::None => Cursor::None {
            active: BTreeSet::new(),
        },
        TimeFormat::Month => Cursor::Month {
            month: months_of(layer, None).ok().and_then(|m| m.first().copied()),
        },
        TimeFormat::Year => Cursor::Year {
            year: years_of(layer).ok().and_then(|y| y.first().copied()),
        },
        TimeFormat::YearMonth => {
            let year = years_of(layer).ok().and_then(|y| y.first().copied());
            let month = year
                .and_then(|y| months_of(layer, Some(y)).ok())
                .and_then(|m| m.first().copied());
            Cursor::YearMonth { year, month }
        }
    }
}

/// Startup state: nothing selected or visible, earliest keys preselected,
/// full opacity, identity layout, calibration unlocked.
pub fn initial_state(manifest: &ProjectManifest) -> PresenterState {
    let runtimes = manifest
        .layers
        .iter()
        .map(|layer| {
            (
                layer.id.clone(),
                LayerRuntime {
                    visible: false,
                    opacity: 1.0,
                    cursor: initial_cursor(layer),
                },
            )
        })
        .collect();
    PresenterState {
        version: 0,
        selected_layer: None,
        runtimes,
        transforms: identity_layout(manifest),
        calibration_locked: false,
    }
}

pub fn identity_layout(manifest: &ProjectManifest) -> BTreeMap<ElementId, ElementTransform> {
    std::iter::once(ElementId::Basemap)
        .chain(manifest.layers.iter().map(|l| ElementId::layer(&l.id)))
        .map(|id| (id.clone(), ElementTransform::identity(id)))
        .collect()
}

fn wrong_kind(event: &str, layer: &DataLayer) -> Rejection {
    Rejection::new(
        RejectCode::WrongEventKind,
        format!(
            "{event} does not apply to layer {:?} with time format {}",
            layer.id, layer.time_format
        ),
    )
}

fn missing_key(layer: &DataLayer, what: String) -> Rejection {
    Rejection::new(
        RejectCode::NonexistentTimeKey,
        format!("layer {:?} has no sublayer for {what}", layer.id),
    )
}

/// Apply one event. Pure: the result depends only on the arguments.
pub fn apply_event(
    state: &PresenterState,
    event: &StateEvent,
    manifest: &ProjectManifest,
) -> Result<PresenterState, Rejection> {
    let mut next = state.clone();

    let lookup = |id: &str| -> Result<&DataLayer, Rejection> {
        manifest
            .layer(id)
            .filter(|_| state.runtimes.contains_key(id))
            .ok_or_else(|| Rejection::new(RejectCode::UnknownLayer, format!("no layer with id {id:?}")))
    };

    match event {
        StateEvent::SelectLayer { id } => {
            lookup(id)?;
            let runtime = next.runtimes.get_mut(id).expect("checked by lookup");
            if next.selected_layer.as_deref() == Some(id.as_str()) {
                runtime.visible = !runtime.visible;
            } else {
                next.selected_layer = Some(id.clone());
                runtime.visible = true;
            }
        }
        StateEvent::SetLayerVisible { id, visible } => {
            lookup(id)?;
            next.runtimes.get_mut(id).expect("checked by lookup").visible = *visible;
        }
        StateEvent::ToggleSublayer { id, index } => {
            let layer = lookup(id)?;
            let runtime = next.runtimes.get_mut(id).expect("checked by lookup");
            let Cursor::None { active } = &mut runtime.cursor else {
                return Err(wrong_kind("toggle_sublayer", layer));
            };
            if *index >= layer.sublayers.len() {
                return Err(Rejection::new(
                    RejectCode::OutOfRange,
                    format!(
                        "layer {id:?} has {} sublayers, index {index} is out of range",
                        layer.sublayers.len()
                    ),
                ));
            }
            if !active.remove(index) {
                active.insert(*index);
            }
        }
        StateEvent::SetMonth { id, month } => {
            let layer = lookup(id)?;
            let runtime = next.runtimes.get_mut(id).expect("checked by lookup");
            match &mut runtime.cursor {
                Cursor::Month { month: cursor } => {
                    if layer.sublayer_for(&TimeKey::Month { month: *month }).is_none() {
                        return Err(missing_key(layer, format!("month {month}")));
                    }
                    *cursor = Some(*month);
                }
                Cursor::YearMonth { year, month: cursor } => {
                    let Some(y) = *year else {
                        return Err(missing_key(layer, format!("month {month} without a selected year")));
                    };
                    if layer
                        .sublayer_for(&TimeKey::YearMonth { year: y, month: *month })
                        .is_none()
                    {
                        return Err(missing_key(layer, format!("{y}-{month:02}")));
                    }
                    *cursor = Some(*month);
                }
                _ => return Err(wrong_kind("set_month", layer)),
            }
        }
        StateEvent::SetYear { id, year } => {
            let layer = lookup(id)?;
            let runtime = next.runtimes.get_mut(id).expect("checked by lookup");
            match &mut runtime.cursor {
                Cursor::Year { year: cursor } => {
                    if layer.sublayer_for(&TimeKey::Year { year: *year }).is_none() {
                        return Err(missing_key(layer, format!("year {year}")));
                    }
                    *cursor = Some(*year);
                }
                Cursor::YearMonth { year: cursor, month } => {
                    let available = months_of(layer, Some(*year)).unwrap_or_default();
                    let Some(&earliest) = available.first() else {
                        return Err(missing_key(layer, format!("year {year}")));
                    };
                    *cursor = Some(*year);
                    if !month.is_some_and(|m| available.contains(&m)) {
                        *month = Some(earliest);
                    }
                }
                _ => return Err(wrong_kind("set_year", layer)),
            }
        }
        StateEvent::SetOpacity { id, value } => {
            lookup(id)?;
            if value.is_nan() {
                return Err(Rejection::new(RejectCode::InvalidValue, "opacity must be a number"));
            }
            next.runtimes.get_mut(id).expect("checked by lookup").opacity = value.clamp(0.0, 1.0);
        }
        StateEvent::SetTransform(transform) => {
            if state.calibration_locked {
                return Err(Rejection::new(
                    RejectCode::CalibrationLocked,
                    "layout changes are locked during the presentation",
                ));
            }
            if let ElementId::Layer(id) = &transform.element_id {
                lookup(id)?;
            }
            if !transform.is_well_formed() {
                return Err(Rejection::new(
                    RejectCode::InvalidValue,
                    "transform offsets must be finite and scales positive",
                ));
            }
            next.transforms.insert(transform.element_id.clone(), transform.clone());
        }
        StateEvent::ResetLayout => {
            next.transforms = identity_layout(manifest);
        }
        StateEvent::SetCalibrationLocked { flag } => {
            next.calibration_locked = *flag;
        }
    }

    next.version = state.version + 1;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawEntry {
    pub image: String,
    pub opacity: f64,
    pub transform: ElementTransform,
}

/// Ordered images to show: basemap first, then visible layers in manifest
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawList {
    pub entries: Vec<DrawEntry>,
}

impl DrawList {
    pub fn images(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.image.as_str()).collect()
    }
}

pub fn resolve_draw_list(state: &PresenterState, manifest: &ProjectManifest) -> DrawList {
    let mut entries = vec![DrawEntry {
        image: manifest.basemap.image.clone(),
        opacity: 1.0,
        transform: state.transform(&ElementId::Basemap),
    }];

    for layer in &manifest.layers {
        let Some(runtime) = state.runtimes.get(&layer.id).filter(|r| r.visible) else {
            continue;
        };
        let transform = state.transform(&ElementId::layer(&layer.id));
        let mut push = |image: &str| {
            entries.push(DrawEntry {
                image: image.to_string(),
                opacity: runtime.opacity,
                transform: transform.clone(),
            })
        };
        let key = match &runtime.cursor {
            Cursor::None { active } => {
                for &index in active {
                    if let Some(sub) = layer.sublayers.get(index) {
                        push(&sub.image);
                    }
                }
                None
            }
            Cursor::Month { month } => month.map(|month| TimeKey::Month { month }),
            Cursor::Year { year } => year.map(|year| TimeKey::Year { year }),
            Cursor::YearMonth { year, month } => match (year, month) {
                (Some(year), Some(month)) => Some(TimeKey::YearMonth {
                    year: *year,
                    month: *month,
                }),
                _ => None,
            },
        };
        if let Some((_, sub)) = key.and_then(|k| layer.sublayer_for(&k)) {
            push(&sub.image);
        }
    }
    DrawList { entries }
}

/// Apply `events` in order from `state`, skipping rejections. Returns the
/// final state and each event's outcome.
pub fn replay<'a>(
    manifest: &ProjectManifest,
    mut state: PresenterState,
    events: impl IntoIterator<Item = &'a StateEvent>,
) -> (PresenterState, Vec<Result<u64, Rejection>>) {
    let mut outcomes = Vec::new();
    for event in events {
        match apply_event(&state, event, manifest) {
            Ok(next) => {
                outcomes.push(Ok(next.version));
                state = next;
            }
            Err(rejection) => outcomes.push(Err(rejection)),
        }
    }
    (state, outcomes)
}

/// Parse the textual key used on the command line for a sublayer of
/// `layer`: `2000`, `M06` (or `6`, `June`), `2000-01`, or a label.
pub fn parse_time_spec(layer: &DataLayer, spec: &str) -> Option<TimeKey> {
    let spec = spec.trim();
    let key = match layer.time_format {
        TimeFormat::Year => TimeKey::Year {
            year: spec.parse().ok()?,
        },
        TimeFormat::Month => TimeKey::Month {
            month: parse_month(spec)?,
        },
        TimeFormat::YearMonth => {
            let (year, month) = spec.split_once('-')?;
            TimeKey::YearMonth {
                year: year.parse().ok()?,
                month: parse_month(month)?,
            }
        }
        TimeFormat::None => {
            let sub = layer
                .sublayers
                .iter()
                .find(|s| matches!(&s.key, TimeKey::None { label } if label == spec))
                .or_else(|| {
                    layer
                        .sublayers
                        .iter()
                        .find(|s| matches!(&s.key, TimeKey::None { label } if label.eq_ignore_ascii_case(spec)))
                })?;
            sub.key.clone()
        }
    };
    Some(key)
}

fn parse_month(spec: &str) -> Option<u32> {
    let digits = spec.strip_prefix(['M', 'm']).unwrap_or(spec);
    if let Ok(month) = digits.parse::<u32>() {
        return (1..=12).contains(&month).then_some(month);
    }
    (1..=12).find(|&m| {
        crate::author::month_name(m).is_some_and(|name| {
            name.eq_ignore_ascii_case(spec) || (spec.len() == 3 && name[..3].eq_ignore_ascii_case(spec))
        })
    })
}

/// Events that select `layer` and bring each key in `keys` on screen.
/// Several keys only make sense for a static layer.
pub fn show_events(layer: &DataLayer, keys: &[TimeKey]) -> Vec<StateEvent> {
    let id = layer.id.clone();
    let mut events = vec![StateEvent::SelectLayer { id: id.clone() }];
    for key in keys {
        match key {
            TimeKey::Year { year } => events.push(StateEvent::SetYear {
                id: id.clone(),
                year: *year,
            }),
            TimeKey::Month { month } => events.push(StateEvent::SetMonth {
                id: id.clone(),
                month: *month,
            }),
            TimeKey::YearMonth { year, month } => {
                events.push(StateEvent::SetYear {
                    id: id.clone(),
                    year: *year,
                });
                events.push(StateEvent::SetMonth {
                    id: id.clone(),
                    month: *month,
                });
            }
            TimeKey::None { .. } => {
                let index = layer.sublayer_for(key).map_or(usize::MAX, |(i, _)| i);
                events.push(StateEvent::ToggleSublayer { id: id.clone(), index });
            }
        }
    }
    events
}

/// A fresh state with only `layer_id` on screen at `keys`.
pub fn showing(
    manifest: &ProjectManifest,
    layer_id: &str,
    keys: &[TimeKey],
    opacity: Option<f64>,
) -> Result<PresenterState, Rejection> {
    let layer = manifest
        .layer(layer_id)
        .ok_or_else(|| Rejection::new(RejectCode::UnknownLayer, format!("no layer with id {layer_id:?}")))?;
    let mut events = show_events(layer, keys);
    if let Some(value) = opacity {
        events.push(StateEvent::SetOpacity {
            id: layer.id.clone(),
            value,
        });
    }
    let mut state = initial_state(manifest);
    for event in &events {
        state = apply_event(&state, event, manifest)?;
    }
    Ok(state)
}
