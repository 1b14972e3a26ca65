use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use gatescope::library::GateLibrary;
use gatescope::netlist::Netlist;
use parking_lot::{Mutex, RwLock, RwLockWriteGuard};
use serde::Serialize;

use crate::ApiError;

const WRITE_WAIT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum JobStatus {
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Job {
    pub id: u64,
    pub kind: String,
    pub status: JobStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One loaded netlist plus the analysis jobs run against it.
///
/// Mutations take the write lock and are refused while any job is running;
/// jobs read under the shared lock on a blocking worker.
pub struct Session {
    pub id: String,
    pub library: Arc<GateLibrary>,
    netlist: RwLock<Netlist>,
    jobs: Mutex<BTreeMap<u64, Job>>,
    next_job: AtomicU64,
    running: AtomicUsize,
    cursors: Mutex<HashMap<String, u64>>,
}

impl Session {
    pub fn new(netlist: Netlist) -> Arc<Self> {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        Arc::new(Session {
            id: format!("s{}", NEXT.fetch_add(1, Ordering::Relaxed)),
            library: netlist.library().clone(),
            netlist: RwLock::new(netlist),
            jobs: Mutex::new(BTreeMap::new()),
            next_job: AtomicU64::new(1),
            running: AtomicUsize::new(0),
            cursors: Mutex::new(HashMap::new()),
        })
    }

    pub fn read<R>(&self, f: impl FnOnce(&Netlist) -> R) -> R {
        f(&self.netlist.read())
    }

    /// Exclusive access for a mutation, or a conflict if a job is running.
    pub fn write(&self) -> Result<RwLockWriteGuard<'_, Netlist>, ApiError> {
        let busy = || ApiError::Conflict("an analysis job is running".into());
        if self.running.load(Ordering::SeqCst) > 0 {
            return Err(busy());
        }
        // A job that slipped in after the check holds the read lock for its
        // whole run; give up rather than stall the request.
        let guard = self.netlist.try_write_for(WRITE_WAIT).ok_or_else(busy)?;
        if self.running.load(Ordering::SeqCst) > 0 {
            return Err(busy());
        }
        Ok(guard)
    }

    pub fn job(&self, id: u64) -> Option<Job> {
        self.jobs.lock().get(&id).cloned()
    }

    pub fn jobs(&self) -> Vec<Job> {
        self.jobs.lock().values().cloned().collect()
    }

    pub fn running_jobs(&self) -> usize {
        self.running.load(Ordering::SeqCst)
    }

    /// Register a job and run `work` on a blocking worker under the read
    /// lock. Returns the job id immediately.
    pub fn spawn_job<F>(self: &Arc<Self>, kind: &str, work: F) -> u64
    where
        F: FnOnce(&Netlist) -> Result<serde_json::Value, String> + Send + 'static,
    {
        let id = self.next_job.fetch_add(1, Ordering::SeqCst);
        {
            // Counted under the read lock, so no writer can be between its
            // own check and its mutation.
            let _guard = self.netlist.read();
            self.running.fetch_add(1, Ordering::SeqCst);
        }
        self.jobs.lock().insert(
            id,
            Job {
                id,
                kind: kind.to_string(),
                status: JobStatus::Running,
                result: None,
                error: None,
            },
        );
        log::info!(target: "api", "job {id} ({kind}) started");
        let session = Arc::clone(self);
        tokio::task::spawn_blocking(move || {
            let outcome = {
                let nl = session.netlist.read();
                std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| work(&nl)))
                    .unwrap_or_else(|_| Err("analysis panicked".to_string()))
            };
            if let Some(job) = session.jobs.lock().get_mut(&id) {
                match outcome {
                    Ok(v) => {
                        job.status = JobStatus::Done;
                        job.result = Some(v);
                    }
                    Err(e) => {
                        log::warn!(target: "api", "job {id} failed: {e}");
                        job.status = JobStatus::Failed;
                        job.error = Some(e);
                    }
                }
            }
            session.running.fetch_sub(1, Ordering::SeqCst);
            log::info!(target: "api", "job {id} finished");
        });
        id
    }

    pub fn cursor(&self, client: &str) -> u64 {
        self.cursors.lock().get(client).copied().unwrap_or(0)
    }

    pub fn set_cursor(&self, client: &str, seq: u64) {
        self.cursors.lock().insert(client.to_string(), seq);
    }

    /// Event sequence numbers restart when a snapshot replaces the netlist.
    pub fn reset_cursors(&self) {
        self.cursors.lock().clear();
    }
}
