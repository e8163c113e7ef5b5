//! Live tracking session behind a WebSocket.
//!
//! One ingest thread owns the tracker. Connections forward their gaze and
//! double-click messages to it in arrival order and observe its output:
//! tracker events over a broadcast channel, highlight state over a watch
//! channel so a slow client sees the latest counts instead of a backlog.

pub mod protocol;

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use futures_util::stream::SplitSink;
use futures_util::{SinkExt, StreamExt};
use gazeread::geometry::Point;
use gazeread::tracker::{EventRecord, GazeSample, Tracker, TrackerEvent, WordCount};
use thiserror::Error;
use tokio::io::{AsyncRead, AsyncWrite};
use tokio::net::{TcpListener, ToSocketAddrs};
use tokio::sync::{broadcast, mpsc, watch};
use tokio_tungstenite::tungstenite::protocol::frame::coding::CloseCode;
use tokio_tungstenite::tungstenite::protocol::CloseFrame;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::WebSocketStream;

pub use protocol::{parse_inbound, Frame, Inbound, Outbound, Rejection, PROTOCOL_VERSION};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    WebSocket(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("session has shut down")]
    SessionClosed,
}

pub type Result<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// How often every connection gets a full highlight snapshot.
    pub snapshot_interval: Duration,
    /// Events an observer may fall behind before it starts missing some.
    pub event_buffer: usize,
    /// Inbound messages queued ahead of the ingest thread.
    pub inbound_buffer: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { snapshot_interval: Duration::from_secs(2), event_buffer: 4096, inbound_buffer: 1024 }
    }
}

/// Sent from the session to one connection only.
#[derive(Debug)]
enum Direct {
    Frame(Frame),
    Close(String),
}

enum Command {
    Gaze(GazeSample<f64>, mpsc::UnboundedSender<Direct>),
    DoubleClick(Point<f64>, mpsc::UnboundedSender<Direct>),
}

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

/// A document being read, shared by every connection.
pub struct Session {
    id: u64,
    config: ServiceConfig,
    layout_frame: String,
    commands: mpsc::Sender<Command>,
    events: broadcast::Sender<EventRecord>,
    highlight: watch::Receiver<Vec<u32>>,
    clients: AtomicUsize,
}

impl Session {
    /// Starts the ingest thread. It stops once the session is dropped.
    pub fn start(tracker: Tracker<f64>, config: ServiceConfig) -> Arc<Self> {
        let layout = tracker.layout().clone();
        let layout_frame = Frame::new(Outbound::Layout { layout: layout.export() }).to_json();
        let (commands, rx) = mpsc::channel(config.inbound_buffer.max(1));
        let (events, _) = broadcast::channel(config.event_buffer.max(1));
        let (highlight_tx, highlight) = watch::channel(vec![0; layout.words.len()]);
        let ev = events.clone();
        std::thread::Builder::new()
            .name("gazeread-ingest".into())
            .spawn(move || ingest_loop(tracker, rx, ev, highlight_tx))
            .expect("spawn ingest thread");
        Arc::new(Self {
            id: NEXT_SESSION.fetch_add(1, Ordering::Relaxed),
            config,
            layout_frame,
            commands,
            events,
            highlight,
            clients: AtomicUsize::new(0),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn connected_clients(&self) -> usize {
        self.clients.load(Ordering::Relaxed)
    }

    /// Runs one WebSocket connection to completion.
    pub async fn handle<S>(self: Arc<Self>, stream: S) -> Result<()>
    where
        S: AsyncRead + AsyncWrite + Unpin + Send + 'static,
    {
        let ws = tokio_tungstenite::accept_async(stream).await?;
        self.clients.fetch_add(1, Ordering::Relaxed);
        let result = self.clone().connection(ws).await;
        self.clients.fetch_sub(1, Ordering::Relaxed);
        result
    }

    async fn connection<S>(self: Arc<Self>, ws: WebSocketStream<S>) -> Result<()>
    where
        S: AsyncRead + AsyncWrite + Unpin + Send + 'static,
    {
        let (sink, mut stream) = ws.split();
        // Subscribe before the layout goes out so nothing after it is missed.
        let events = self.events.subscribe();
        let highlight = self.highlight.clone();
        let (direct_tx, direct) = mpsc::unbounded_channel();

        let mut writer = tokio::spawn(write_loop(self.clone(), sink, events, highlight, direct));

        let result = async {
            while let Some(msg) = stream.next().await {
                let text = match msg? {
                    Message::Text(t) => t,
                    Message::Close(_) => break,
                    Message::Binary(_) => {
                        let _ = direct_tx.send(error_frame("binary frames are not supported"));
                        continue;
                    }
                    _ => continue,
                };
                let cmd = match parse_inbound(text.as_str()) {
                    Ok(Inbound::Gaze { t_ms, x, y, valid }) => {
                        let sample = if valid { GazeSample::valid(t_ms, x, y) } else { GazeSample::invalid(t_ms) };
                        Command::Gaze(sample, direct_tx.clone())
                    }
                    Ok(Inbound::DoubleClick { x, y }) => Command::DoubleClick(Point::new(x, y), direct_tx.clone()),
                    Err(Rejection::Malformed(msg)) => {
                        let _ = direct_tx.send(error_frame(&msg));
                        continue;
                    }
                    Err(Rejection::Version(v)) => {
                        let reason = format!("unsupported protocol version {v}, expected {PROTOCOL_VERSION}");
                        let _ = direct_tx.send(Direct::Close(reason));
                        break;
                    }
                };
                self.commands.send(cmd).await.map_err(|_| ServiceError::SessionClosed)?;
            }
            Ok(())
        }
        .await;

        // Let a pending close frame or error reply go out before tearing down.
        drop(direct_tx);
        match tokio::time::timeout(Duration::from_secs(1), &mut writer).await {
            Ok(Ok(Err(e))) if result.is_ok() => return Err(e),
            Ok(_) => {}
            Err(_) => {
                tracing::debug!(session = self.id, "writer did not finish in time");
                writer.abort();
            }
        }
        result
    }
}

async fn write_loop<S>(
    session: Arc<Session>,
    mut sink: SplitSink<WebSocketStream<S>, Message>,
    mut events: broadcast::Receiver<EventRecord>,
    mut highlight: watch::Receiver<Vec<u32>>,
    mut direct: mpsc::UnboundedReceiver<Direct>,
) -> Result<()>
where
    S: AsyncRead + AsyncWrite + Unpin,
{
    sink.send(Message::text(session.layout_frame.clone())).await?;
    let mut sent = highlight.borrow_and_update().clone();
    sink.send(Message::text(snapshot_frame(&sent).to_json())).await?;
    let mut ticker = tokio::time::interval(session.config.snapshot_interval);
    ticker.tick().await;
    loop {
        let frame = tokio::select! {
            biased;
            // Anything published before a direct reply goes out ahead of it.
            e = events.recv() => match e {
                Ok(event) => Frame::new(Outbound::Event { event }),
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    Frame::new(Outbound::Error { msg: format!("observer lagged; {n} events dropped") })
                }
                Err(broadcast::error::RecvError::Closed) => return Ok(()),
            },
            c = highlight.changed() => {
                if c.is_err() {
                    return Ok(());
                }
                let now = highlight.borrow_and_update().clone();
                let words = delta(&sent, &now);
                sent = now;
                if words.is_empty() {
                    continue;
                }
                Frame::new(Outbound::Highlight { words, snapshot: false })
            },
            d = direct.recv() => match d {
                Some(Direct::Frame(f)) => f,
                Some(Direct::Close(reason)) => {
                    let close = CloseFrame { code: CloseCode::Protocol, reason: reason.into() };
                    let _ = sink.send(Message::Close(Some(close))).await;
                    return Ok(());
                }
                None => return Ok(()),
            },
            _ = ticker.tick() => {
                sent = highlight.borrow().clone();
                snapshot_frame(&sent)
            },
        };
        sink.send(Message::text(frame.to_json())).await?;
    }
}

fn error_frame(msg: &str) -> Direct {
    Direct::Frame(Frame::new(Outbound::Error { msg: msg.to_owned() }))
}

fn snapshot_frame(counts: &[u32]) -> Frame {
    let words = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(index, &count)| WordCount { index, count })
        .collect();
    Frame::new(Outbound::Highlight { words, snapshot: true })
}

fn delta(old: &[u32], new: &[u32]) -> Vec<WordCount> {
    old.iter()
        .zip(new)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(index, (_, &count))| WordCount { index, count })
        .collect()
}

fn ingest_loop(
    mut tracker: Tracker<f64>,
    mut commands: mpsc::Receiver<Command>,
    events: broadcast::Sender<EventRecord>,
    highlight: watch::Sender<Vec<u32>>,
) {
    let mut last_t_ms = 0;
    let publish = |out: Vec<TrackerEvent>, t_ms: i64| {
        for event in out {
            if let TrackerEvent::HighlightUpdate { words } = &event {
                highlight.send_modify(|counts| {
                    for w in words {
                        counts[w.index] = w.count;
                    }
                });
            }
            // No subscribers is fine.
            let _ = events.send(EventRecord { t_ms, event });
        }
    };
    while let Some(cmd) = commands.blocking_recv() {
        match cmd {
            Command::Gaze(sample, reply) => match tracker.ingest(sample) {
                Ok(out) => {
                    last_t_ms = sample.t_ms;
                    publish(out, sample.t_ms);
                }
                Err(e) => {
                    let _ = reply.send(error_frame(&e.to_string()));
                }
            },
            Command::DoubleClick(p, reply) => {
                let out = tracker.force_relocate(p);
                let (word, confirm) = out
                    .iter()
                    .find_map(|e| match e {
                        TrackerEvent::RelocationApplied { word, confirm, .. } => Some((Some(*word), *confirm)),
                        _ => None,
                    })
                    .unwrap_or((None, false));
                publish(out, last_t_ms);
                let _ = reply.send(Direct::Frame(Frame::new(Outbound::Relocated { word, confirm })));
            }
        }
    }
}

/// Accepts connections on `listener` forever.
pub async fn serve(listener: TcpListener, session: Arc<Session>) -> Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        let session = session.clone();
        tokio::spawn(async move {
            if let Err(e) = session.handle(stream).await {
                tracing::debug!(%peer, error = %e, "connection ended with an error");
            }
        });
    }
}

/// Binds `addr` and serves. Returns the bound address through `on_bound`
/// before accepting.
pub async fn bind_and_serve<A: ToSocketAddrs>(
    addr: A,
    session: Arc<Session>,
    on_bound: impl FnOnce(SocketAddr),
) -> Result<()> {
    let listener = TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    serve(listener, session).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deltas_list_changed_words_only() {
        let d = delta(&[0, 1, 2, 0], &[1, 1, 3, 0]);
        assert_eq!(d, vec![WordCount { index: 0, count: 1 }, WordCount { index: 2, count: 3 }]);
        assert!(delta(&[1, 2], &[1, 2]).is_empty());
    }
}
