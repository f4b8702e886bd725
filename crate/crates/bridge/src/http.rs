use std::path::Path;
use std::sync::mpsc::Sender;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::sync::broadcast::error::RecvError;
use tokio::sync::oneshot;
use tower_http::services::ServeDir;

use crate::conductor::Input;
use crate::json::{parse_lines, to_json};

pub(crate) fn router(inputs: Sender<Input>, assets: Option<&Path>) -> Router {
    let router = Router::new().route("/ws", get(upgrade));
    let router = match assets {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    };
    router.with_state(inputs)
}

async fn upgrade(State(inputs): State<Sender<Input>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| client(socket, inputs))
}

/// Sends the current snapshot, then mirrors every outbound message. Text
/// frames from the client are parsed line by line and queued as inbound OSC.
async fn client(mut socket: WebSocket, inputs: Sender<Input>) {
    let (reply, subscription) = oneshot::channel();
    if inputs.send(Input::Connect(reply)).is_err() {
        return;
    }
    let Ok(sub) = subscription.await else {
        return;
    };
    for m in &sub.snapshot {
        let mut line = to_json(m);
        line.push('\n');
        if socket.send(Message::Text(line.into())).await.is_err() {
            return;
        }
    }
    let mut updates = sub.updates;
    loop {
        tokio::select! {
            update = updates.recv() => match update {
                Ok(line) => {
                    if socket.send(Message::Text(line.as_ref().into())).await.is_err() {
                        break;
                    }
                }
                Err(RecvError::Lagged(n)) => log::warn!("websocket client fell behind; {n} messages skipped"),
                Err(RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => match parse_lines(&text) {
                    Ok(msgs) => {
                        for m in msgs {
                            if inputs.send(Input::Message(m)).is_err() {
                                return;
                            }
                        }
                    }
                    Err(e) => log::warn!("websocket: {e}"),
                },
                Some(Ok(Message::Close(_))) | None => break,
                Some(Err(e)) => {
                    log::debug!("websocket: {e}");
                    break;
                }
                Some(Ok(_)) => {}
            },
        }
    }
}
