use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::Html;
use axum::routing::{get, post};
use axum::{Json, Router};
use gatescope::boolean::{from_combinational, from_lut};
use gatescope::fsm::{
    brute_force_state_graph, candidate_report_json, export_dot, find_fsm_candidates, EnumerationLimits,
};
use gatescope::graph::{build_digraph, scc_report_json};
use gatescope::harpoon::{analyze_harpoon, apply_harpoon_patch};
use gatescope::hdl::{decode_init, write_verilog_string, WriteOptions};
use gatescope::library::GateCategory;
use gatescope::netlist::{load_snapshot, save_snapshot, GateId, ModuleId, ModuleState, ModuleUpdate, NetId, Netlist};
use gatescope::watermark::scan_watermarks;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::{ApiError, Session};

type Shared = State<Arc<Session>>;
type ApiResult<T> = Result<T, ApiError>;

const INDEX: &str = include_str!("../assets/index.html");

pub fn router(session: Arc<Session>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/session", get(session_info))
        .route("/api/netlist/summary", get(summary))
        .route("/api/gates", get(gates))
        .route("/api/gates/{id}", get(gate))
        .route("/api/gates/{id}/data", post(set_gate_data))
        .route("/api/nets/{id}", get(net))
        .route("/api/modules", get(modules).post(create_module))
        .route(
            "/api/modules/{id}",
            get(module).patch(update_module).delete(delete_module),
        )
        .route("/api/events", get(events))
        .route("/api/neighborhood", get(neighborhood))
        .route("/api/analyses", get(list_jobs))
        .route("/api/analyses/{kind}", post(start_analysis).get(job))
        .route("/api/harpoon/patch", post(harpoon_patch))
        .route("/api/export/verilog", post(export_verilog))
        .route("/api/snapshot/save", post(snapshot_save))
        .route("/api/snapshot/load", post(snapshot_load))
        .with_state(session);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX) })),
    }
}

fn parse_id(text: &str) -> ApiResult<u32> {
    let digits = text.trim_start_matches(|c: char| c.is_ascii_alphabetic());
    digits
        .parse()
        .map_err(|_| ApiError::BadRequest(format!("bad id `{text}`")))
}

fn parse_id_list(text: &str) -> ApiResult<Vec<u32>> {
    text.split(',').filter(|s| !s.is_empty()).map(parse_id).collect()
}

async fn session_info(State(s): Shared) -> Json<Value> {
    let design = s.read(|nl| nl.design_name.clone());
    Json(json!({
        "id": s.id,
        "design": design,
        "library": s.library.name,
        "running_jobs": s.running_jobs(),
    }))
}

async fn summary(State(s): Shared) -> Json<Value> {
    Json(s.read(|nl| serde_json::to_value(nl.summary()).expect("summary serializes")))
}

fn gate_json(nl: &Netlist, id: GateId) -> ApiResult<Value> {
    let g = nl.gate(id).ok_or_else(|| ApiError::NotFound(format!("no gate {id}")))?;
    let pin = |(p, n): (&str, Option<NetId>)| {
        json!({
            "pin": p,
            "net": n,
            "net_name": n.and_then(|n| nl.net(n)).map(|n| n.name.clone()),
        })
    };
    let mut functions = serde_json::Map::new();
    let mut truth_table = Value::Null;
    match g.category() {
        GateCategory::Lut => {
            if let Ok(f) = from_lut(nl, id) {
                functions.insert(g.gate_type.output_pins[0].clone(), json!(f.to_string()));
            }
            let lut = g.gate_type.lut.as_ref().expect("LUT types carry a spec");
            if let Some(Ok(bits)) = g.config().map(|l| decode_init(l, lut.pin_order.len())) {
                truth_table = json!({
                    "inputs": lut.pin_order,
                    "rows": bits.iter().map(|b| *b as u8).collect::<Vec<_>>(),
                });
            }
        }
        GateCategory::Combinational | GateCategory::Buffer => {
            if let Ok(fs) = from_combinational(nl, id) {
                for (p, f) in fs {
                    functions.insert(p, json!(f.to_string()));
                }
            }
        }
        _ => {
            for (p, t) in &g.gate_type.templates {
                functions.insert(p.clone(), json!(t));
            }
        }
    }
    let modules: Vec<ModuleId> = nl
        .submodules()
        .filter(|m| m.gates.contains(&id))
        .map(|m| m.id)
        .collect();
    Ok(json!({
        "id": g.id,
        "name": g.name,
        "type": g.type_name(),
        "category": g.category(),
        "inputs": g.input_nets().map(pin).collect::<Vec<_>>(),
        "outputs": g.output_nets().map(pin).collect::<Vec<_>>(),
        "data": g.data,
        "functions": functions,
        "truth_table": truth_table,
        "modules": modules,
    }))
}

#[derive(Deserialize)]
struct IdsQuery {
    ids: Option<String>,
}

async fn gates(State(s): Shared, Query(q): Query<IdsQuery>) -> ApiResult<Json<Value>> {
    s.read(|nl| {
        let ids: Vec<GateId> = match &q.ids {
            Some(text) => parse_id_list(text)?.into_iter().map(GateId).collect(),
            None => nl.gates().map(|g| g.id).collect(),
        };
        let list = ids
            .into_iter()
            .map(|id| gate_json(nl, id))
            .collect::<ApiResult<Vec<_>>>()?;
        Ok(Json(Value::Array(list)))
    })
}

async fn gate(State(s): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let id = GateId(parse_id(&id)?);
    s.read(|nl| gate_json(nl, id)).map(Json)
}

#[derive(Deserialize)]
struct GateData {
    key: String,
    value: String,
}

async fn set_gate_data(State(s): Shared, Path(id): Path<String>, Json(body): Json<GateData>) -> ApiResult<Json<Value>> {
    let id = GateId(parse_id(&id)?);
    let mut nl = s.write()?;
    nl.set_gate_data(id, &body.key, &body.value)?;
    gate_json(&nl, id).map(Json)
}

async fn net(State(s): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let id = NetId(parse_id(&id)?);
    s.read(|nl| {
        let n = nl.net(id).ok_or_else(|| ApiError::NotFound(format!("no net {id}")))?;
        let ep = |e: &gatescope::netlist::Endpoint| {
            json!({
                "gate": e.gate,
                "gate_name": nl.gate(e.gate).map(|g| g.name.clone()),
                "pin": e.pin,
            })
        };
        Ok(Json(json!({
            "id": n.id,
            "name": n.name,
            "source": n.source.as_ref().map(ep),
            "sinks": n.sinks.iter().map(ep).collect::<Vec<_>>(),
            "global_input": n.is_global_input,
            "global_output": n.is_global_output,
        })))
    })
}

fn module_json(nl: &Netlist, id: ModuleId) -> ApiResult<Value> {
    let m = nl
        .submodule(id)
        .ok_or_else(|| ApiError::NotFound(format!("no module {id}")))?;
    Ok(json!({
        "id": m.id,
        "name": m.name,
        "gates": m.gates,
        "nets": m.nets,
        "internal_nets": nl.internal_nets(id)?,
        "color": m.color.map(hex_color),
        "parent": m.parent,
    }))
}

fn parse<T: serde::de::DeserializeOwned>(key: &str, v: &Value) -> ApiResult<T> {
    serde_json::from_value(v.clone()).map_err(|e| ApiError::BadRequest(format!("{key}: {e}")))
}

fn hex_color([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// `#rrggbb` or `[r, g, b]`.
fn parse_color(v: &Value) -> ApiResult<[u8; 3]> {
    let bad = || ApiError::BadRequest(format!("bad color {v}"));
    match v {
        Value::String(s) => {
            let hex = s.strip_prefix('#').filter(|h| h.len() == 6).ok_or_else(bad)?;
            let mut out = [0u8; 3];
            for (i, c) in out.iter_mut().enumerate() {
                *c = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
            }
            Ok(out)
        }
        _ => serde_json::from_value(v.clone()).map_err(|_| bad()),
    }
}

async fn modules(State(s): Shared) -> ApiResult<Json<Value>> {
    s.read(|nl| {
        let list = nl
            .submodules()
            .map(|m| module_json(nl, m.id))
            .collect::<ApiResult<Vec<_>>>()?;
        Ok(Json(Value::Array(list)))
    })
}

async fn module(State(s): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let id = ModuleId(parse_id(&id)?);
    s.read(|nl| module_json(nl, id)).map(Json)
}

#[derive(Deserialize)]
struct NewModule {
    name: String,
    #[serde(default)]
    gate_ids: BTreeSet<GateId>,
    #[serde(default)]
    net_ids: BTreeSet<NetId>,
    #[serde(default)]
    color: Option<Value>,
    #[serde(default)]
    parent: Option<ModuleId>,
}

async fn create_module(State(s): Shared, Json(body): Json<NewModule>) -> ApiResult<(StatusCode, Json<Value>)> {
    let color = body.color.as_ref().map(parse_color).transpose()?;
    let mut nl = s.write()?;
    let id = nl.create_submodule(ModuleState {
        name: body.name,
        gates: body.gate_ids,
        nets: body.net_ids,
        color,
        parent: body.parent,
    })?;
    Ok((StatusCode::CREATED, Json(module_json(&nl, id)?)))
}

async fn update_module(State(s): Shared, Path(id): Path<String>, Json(body): Json<Value>) -> ApiResult<Json<Value>> {
    let id = ModuleId(parse_id(&id)?);
    let obj = body
        .as_object()
        .ok_or_else(|| ApiError::BadRequest("expected an object".into()))?;
    let field = |k: &str| obj.get(k);
    // A present `null` clears color or parent; an absent key leaves it alone.
    let update = ModuleUpdate {
        name: field("name").map(|v| parse("name", v)).transpose()?,
        gates: field("gate_ids").map(|v| parse("gate_ids", v)).transpose()?,
        nets: field("net_ids").map(|v| parse("net_ids", v)).transpose()?,
        color: field("color")
            .map(|v| {
                if v.is_null() {
                    Ok(None)
                } else {
                    parse_color(v).map(Some)
                }
            })
            .transpose()?,
        parent: field("parent").map(|v| parse("parent", v)).transpose()?,
    };
    let mut nl = s.write()?;
    nl.update_submodule(id, update)?;
    module_json(&nl, id).map(Json)
}

async fn delete_module(State(s): Shared, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let id = ModuleId(parse_id(&id)?);
    s.write()?.delete_submodule(id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
struct EventsQuery {
    after: Option<u64>,
    client: Option<String>,
    limit: Option<usize>,
}

/// Events with `seq > after`. A named client without `after` resumes from
/// its stored cursor, which then advances to the last event returned.
async fn events(State(s): Shared, Query(q): Query<EventsQuery>) -> Json<Value> {
    let after = q
        .after
        .or_else(|| q.client.as_deref().map(|c| s.cursor(c)))
        .unwrap_or(0);
    let (events, last_seq) = s.read(|nl| {
        let mut tail = nl.events_after(after).to_vec();
        if let Some(limit) = q.limit {
            tail.truncate(limit);
        }
        (tail, nl.last_seq())
    });
    let cursor = events.last().map_or(after.min(last_seq), |e| e.seq);
    if let Some(c) = &q.client {
        s.set_cursor(c, cursor);
    }
    Json(json!({
        "after": after,
        "cursor": cursor,
        "last_seq": last_seq,
        "events": events,
    }))
}

#[derive(Deserialize)]
struct NeighborhoodQuery {
    seed: String,
    #[serde(default = "one")]
    k: usize,
}

fn one() -> usize {
    1
}

async fn neighborhood(State(s): Shared, Query(q): Query<NeighborhoodQuery>) -> ApiResult<Json<Value>> {
    let seeds: BTreeSet<GateId> = parse_id_list(&q.seed)?.into_iter().map(GateId).collect();
    s.read(|nl| {
        if let Some(g) = seeds.iter().find(|g| nl.gate(**g).is_none()) {
            return Err(ApiError::NotFound(format!("no gate {g}")));
        }
        let graph = build_digraph(nl, None);
        let gates = graph.k_hop_neighborhood(&seeds, q.k);
        let edges: Vec<[GateId; 2]> = gates
            .iter()
            .flat_map(|&u| graph.successors(u).filter(|v| gates.contains(v)).map(move |v| [u, v]))
            .collect();
        Ok(Json(
            json!({ "seeds": seeds, "k": q.k, "gates": gates, "edges": edges }),
        ))
    })
}

async fn list_jobs(State(s): Shared) -> Json<Value> {
    Json(json!(s.jobs()))
}

/// `GET /api/analyses/{job}` shares its path shape with the POST route.
async fn job(State(s): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let id = parse_id(&id)? as u64;
    let job = s.job(id).ok_or_else(|| ApiError::NotFound(format!("no job {id}")))?;
    Ok(Json(json!(job)))
}

#[derive(Deserialize, Default)]
struct AnalysisRequest {
    candidate: Option<usize>,
    #[serde(default)]
    include_trivial: bool,
    max_inputs: Option<usize>,
    max_states: Option<usize>,
}

impl AnalysisRequest {
    fn limits(&self) -> EnumerationLimits {
        let d = EnumerationLimits::default();
        EnumerationLimits {
            max_inputs: self.max_inputs.unwrap_or(d.max_inputs),
            max_states: self.max_states.unwrap_or(d.max_states),
        }
    }
}

fn fsm_analysis(nl: &Netlist, req: &AnalysisRequest) -> Result<Value, String> {
    let report = find_fsm_candidates(nl);
    let Some(i) = req.candidate else {
        return Ok(candidate_report_json(nl, &report));
    };
    let cand = report
        .candidates
        .get(i)
        .ok_or_else(|| format!("no FSM candidate {i}"))?;
    let graph = brute_force_state_graph(nl, cand, &req.limits()).map_err(|e| e.to_string())?;
    Ok(json!({ "candidate": i, "graph": graph.to_json(), "dot": export_dot(&graph) }))
}

fn harpoon_analysis(nl: &Netlist, req: &AnalysisRequest) -> Result<Value, String> {
    let report = find_fsm_candidates(nl);
    let i = req.candidate.unwrap_or(0);
    let cand = report
        .candidates
        .get(i)
        .ok_or_else(|| format!("no FSM candidate {i}"))?;
    analyze_harpoon(nl, cand, &req.limits())
        .map(|r| r.to_json())
        .map_err(|e| e.to_string())
}

async fn start_analysis(
    State(s): Shared,
    Path(kind): Path<String>,
    body: Option<Json<AnalysisRequest>>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let id = match kind.as_str() {
        "fsm" => s.spawn_job("fsm", move |nl| fsm_analysis(nl, &req)),
        "scc" => s.spawn_job("scc", move |nl| Ok(scc_report_json(nl, req.include_trivial))),
        "watermark" => s.spawn_job("watermark", |nl| Ok(scan_watermarks(nl).to_json())),
        "harpoon" => s.spawn_job("harpoon", move |nl| harpoon_analysis(nl, &req)),
        other => return Err(ApiError::NotFound(format!("unknown analysis `{other}`"))),
    };
    Ok((
        StatusCode::ACCEPTED,
        Json(json!({ "job": id, "kind": kind, "status": "RUNNING" })),
    ))
}

async fn harpoon_patch(State(s): Shared, body: Option<Json<AnalysisRequest>>) -> ApiResult<Json<Value>> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let mut nl = s.write()?;
    let report = find_fsm_candidates(&nl);
    let i = req.candidate.unwrap_or(0);
    let cand = report
        .candidates
        .get(i)
        .ok_or_else(|| ApiError::BadRequest(format!("no FSM candidate {i}")))?
        .clone();
    let analysis = analyze_harpoon(&nl, &cand, &req.limits()).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let finding = analysis
        .finding
        .clone()
        .ok_or_else(|| ApiError::BadRequest(analysis.reason.clone().unwrap_or_default()))?;
    apply_harpoon_patch(&mut nl, &cand, &finding).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    Ok(Json(json!({
        "patched": true,
        "candidate": i,
        "finding": analysis.to_json()["finding"],
        "last_seq": nl.last_seq(),
    })))
}

#[derive(Deserialize, Default)]
struct ExportRequest {
    #[serde(default)]
    allow_dangling: bool,
}

async fn export_verilog(State(s): Shared, body: Option<Json<ExportRequest>>) -> ApiResult<Json<Value>> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let opts = WriteOptions {
        allow_dangling: req.allow_dangling,
    };
    let text = s
        .read(|nl| write_verilog_string(nl, opts))
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    Ok(Json(json!({ "verilog": text })))
}

#[derive(Deserialize, Default)]
struct SnapshotRequest {
    path: Option<PathBuf>,
    snapshot: Option<Value>,
}

/// Without a path the snapshot document is returned inline.
async fn snapshot_save(State(s): Shared, body: Option<Json<SnapshotRequest>>) -> ApiResult<Json<Value>> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let mut buf = Vec::new();
    s.read(|nl| save_snapshot(nl, &mut buf))
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    match req.path {
        Some(path) => {
            std::fs::write(&path, &buf).map_err(|e| ApiError::BadRequest(format!("{}: {e}", path.display())))?;
            Ok(Json(json!({ "path": path, "bytes": buf.len() })))
        }
        None => {
            let doc: Value = serde_json::from_slice(&buf).map_err(|e| ApiError::Internal(e.to_string()))?;
            Ok(Json(json!({ "snapshot": doc })))
        }
    }
}

async fn snapshot_load(State(s): Shared, Json(req): Json<SnapshotRequest>) -> ApiResult<Json<Value>> {
    let loaded = match (req.path, req.snapshot) {
        (Some(path), None) => {
            let file =
                std::fs::File::open(&path).map_err(|e| ApiError::BadRequest(format!("{}: {e}", path.display())))?;
            load_snapshot(std::io::BufReader::new(file), s.library.clone())
        }
        (None, Some(doc)) => load_snapshot(doc.to_string().as_bytes(), s.library.clone()),
        _ => return Err(ApiError::BadRequest("give exactly one of `path` or `snapshot`".into())),
    }
    .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let mut nl = s.write()?;
    *nl = loaded;
    s.reset_cursors();
    log::info!(target: "api", "snapshot loaded: {}", nl.design_name);
    Ok(Json(
        json!({ "design": nl.design_name, "summary": nl.summary(), "last_seq": nl.last_seq() }),
    ))
}
