//! Server selection: every command runs as a client of a shapeseq service,
//! either one named with `--server` or an ephemeral in-process instance on
//! a loopback port.

use anyhow::{bail, Context, Result};
use shapeseq_client::ShapeseqClient;
use shapeseq_core::RunConfig;
use shapeseq_service::{router, AppState};

pub struct Session {
    pub client: ShapeseqClient,
    runtime: Option<tokio::runtime::Runtime>,
}

impl Session {
    /// Connect to `server`, or start an embedded service with `config`.
    /// With an external server the local config must be untouched (the
    /// server's own config governs encoding).
    pub fn connect(
        server: Option<&str>,
        config: RunConfig,
        config_was_customized: bool,
    ) -> Result<Session> {
        match server {
            Some(url) => {
                if config_was_customized {
                    bail!(
                        "--config/--set cannot be combined with --server; \
                         the server's configuration governs encoding"
                    );
                }
                let client = ShapeseqClient::new(url)?;
                client
                    .healthz()
                    .with_context(|| format!("server {url} is not reachable"))?;
                Ok(Session {
                    client,
                    runtime: None,
                })
            }
            None => {
                let runtime = tokio::runtime::Builder::new_multi_thread()
                    .worker_threads(2)
                    .enable_all()
                    .build()
                    .context("starting the embedded server runtime")?;
                let state = AppState::new(config);
                let (tx, rx) = std::sync::mpsc::channel();
                runtime.spawn(async move {
                    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
                        .await
                        .expect("bind an ephemeral loopback port");
                    tx.send(listener.local_addr().expect("local addr"))
                        .expect("report the bound address");
                    axum::serve(listener, router(state))
                        .await
                        .expect("embedded server");
                });
                let addr = rx
                    .recv()
                    .context("embedded server failed to start")?;
                let client = ShapeseqClient::new(&format!("http://{addr}"))?;
                Ok(Session {
                    client,
                    runtime: Some(runtime),
                })
            }
        }
    }

    /// Tear down the embedded server, if any.
    pub fn finish(self) {
        if let Some(rt) = self.runtime {
            rt.shutdown_background();
        }
    }
}
