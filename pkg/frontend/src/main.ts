// Page bootstrap: builds the DOM, loads map/state/metrics over HTTP,
// opens the gateway websocket and keeps everything redrawn from the
// store. All I/O is injectable so the whole app runs under jsdom.

import { renderChat } from "./chat";
import { renderDashboard } from "./dashboard";
import { drawScene } from "./map";
import {
  makeClipFrame,
  makeTextFrame,
  MapData,
  MetricsReport,
  StateFrame,
} from "./schema";
import { GatewayClient, SocketFactory } from "./socket";
import { Store } from "./store";

// Shipped demo clips. There is no listing endpoint, so the picker carries
// the ids the gateway's bundled clip store knows about.
const CLIPS: Array<[string, string]> = [
  ["c01", "hello robot"],
  ["c02", "move forward 2 meters"],
  ["c03", "rotate left 90 degrees"],
  ["c04", "what is your current location"],
  ["c05", "what do you see"],
  ["c06", "where is the chair"],
  ["c07", "navigate to the kitchen area"],
  ["c08", "navigate to the office"],
  ["c09", "stop"],
  ["c10", "navigate to the lounge"],
  ["c11", "move backward 1 meter"],
  ["c12", "turn right"],
];

export interface BootOptions {
  root: HTMLElement;
  baseUrl?: string; // http origin; "" means same-origin relative paths
  wsUrl?: string;
  makeSocket?: SocketFactory;
  fetchFn?: typeof fetch;
}

export interface App {
  store: Store;
  client: GatewayClient;
  dom: {
    chat: HTMLElement;
    pose: HTMLElement;
    dash: HTMLElement;
    conn: HTMLElement;
    input: HTMLInputElement;
    clip: HTMLSelectElement;
    send: HTMLButtonElement;
    modeText: HTMLButtonElement;
    modeVoice: HTMLButtonElement;
    canvas: HTMLCanvasElement;
  };
  sendCurrent: () => void;
  destroy: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  id?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (id) node.id = id;
  return node;
}

function buildDom(root: HTMLElement): App["dom"] {
  const doc = root.ownerDocument;
  root.textContent = "";

  const topbar = el(doc, "header", "topbar");
  const title = el(doc, "h1");
  title.textContent = "robochat";
  const conn = el(doc, "span", "pill connecting", "conn");
  conn.textContent = "connecting";
  const modeBox = el(doc, "div", "mode-toggle");
  const modeText = el(doc, "button", "mode active", "mode-text");
  modeText.textContent = "text";
  const modeVoice = el(doc, "button", "mode", "mode-voice");
  modeVoice.textContent = "voice";
  modeBox.append(modeText, modeVoice);
  topbar.append(title, conn, modeBox);

  const columns = el(doc, "div", "columns");

  const chatPane = el(doc, "section", "chat-pane");
  const chat = el(doc, "div", "chat", "chat");
  const composer = el(doc, "div", "composer");
  const input = el(doc, "input", "", "say") as HTMLInputElement;
  input.placeholder = "type a command, e.g. navigate to the kitchen area";
  const clip = el(doc, "select", "hidden", "clip") as HTMLSelectElement;
  for (const [id, words] of CLIPS) {
    const opt = doc.createElement("option");
    opt.value = id;
    opt.textContent = `${id} — ${words}`;
    clip.appendChild(opt);
  }
  const send = el(doc, "button", "", "send") as HTMLButtonElement;
  send.textContent = "send";
  composer.append(input, clip, send);
  chatPane.append(chat, composer);

  const worldPane = el(doc, "section", "world-pane");
  const canvas = el(doc, "canvas", "scene", "scene") as HTMLCanvasElement;
  canvas.width = 520;
  canvas.height = 520;
  const pose = el(doc, "div", "pose-readout", "pose");
  pose.textContent = "pose: unknown";
  const dash = el(doc, "div", "dash", "dash");
  worldPane.append(canvas, pose, dash);

  columns.append(chatPane, worldPane);
  root.append(topbar, columns);

  return { chat, pose, dash, conn, input, clip, send, modeText, modeVoice, canvas };
}

function poseLine(store: Store): string {
  const p = store.state.pose;
  if (!p) return "pose: unknown";
  return (
    `x=${p.x.toFixed(2)} m, y=${p.y.toFixed(2)} m, ` +
    `heading=${p.theta.toFixed(2)} rad — ${store.state.status}`
  );
}

export async function boot(opts: BootOptions): Promise<App> {
  const root = opts.root;
  const doc = root.ownerDocument;
  const base = opts.baseUrl ?? "";
  const fetchFn = opts.fetchFn ?? fetch;
  const store = new Store();
  const dom = buildDom(root);

  const win = doc.defaultView;
  const wsUrl =
    opts.wsUrl ??
    (win && win.location.host
      ? `${win.location.protocol === "https:" ? "wss" : "ws"}://${win.location.host}/ws`
      : "ws://localhost:8000/ws");
  const client = new GatewayClient(wsUrl, opts.makeSocket);

  // canvas 2d context is not available everywhere (jsdom); the pose
  // readout below the canvas carries the same information as text.
  const ctx = dom.canvas.getContext && dom.canvas.getContext("2d");

  let lastReport: MetricsReport | null | undefined;
  const redraw = () => {
    renderChat(dom.chat, store.state.chat);
    dom.pose.textContent = poseLine(store);
    dom.conn.textContent = store.state.connection;
    dom.conn.className = `pill ${store.state.connection}`;
    if (store.state.report !== lastReport) {
      lastReport = store.state.report;
      renderDashboard(dom.dash, store.state.report);
    }
    if (ctx && store.state.map) {
      drawScene(ctx, dom.canvas.width, dom.canvas.height, {
        map: store.state.map,
        pose: store.state.pose,
        trail: store.state.trail,
      });
    }
  };
  const unsubscribe = store.subscribe(redraw);

  client.on("frame", (frame) => store.applyFrame(frame));
  client.on("open", () => store.setConnection("open"));
  client.on("close", () => store.setConnection("closed"));
  client.on("queued", (_frame, depth) => {
    store.addNotice(`offline — message queued (${depth} waiting)`);
  });

  const sendCurrent = () => {
    if (store.state.mode === "voice") {
      const id = dom.clip.value;
      if (!id) return;
      store.addUserTurn(`[clip ${id}]`);
      client.send(makeClipFrame(id));
      return;
    }
    const text = dom.input.value.trim();
    if (!text) return;
    store.addUserTurn(text);
    client.send(makeTextFrame(text));
    dom.input.value = "";
  };

  dom.send.addEventListener("click", sendCurrent);
  dom.input.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.key === "Enter") sendCurrent();
  });
  const setMode = (mode: "text" | "voice") => {
    store.setMode(mode);
    dom.modeText.className = mode === "text" ? "mode active" : "mode";
    dom.modeVoice.className = mode === "voice" ? "mode active" : "mode";
    dom.input.className = mode === "text" ? "" : "hidden";
    dom.clip.className = mode === "voice" ? "" : "hidden";
  };
  dom.modeText.addEventListener("click", () => setMode("text"));
  dom.modeVoice.addEventListener("click", () => setMode("voice"));

  // initial snapshot over plain HTTP, then the socket takes over
  try {
    const [mapRes, stateRes, metricsRes] = await Promise.all([
      fetchFn(`${base}/map`),
      fetchFn(`${base}/state`),
      fetchFn(`${base}/metrics`),
    ]);
    store.setMap((await mapRes.json()) as MapData);
    const state = await stateRes.json();
    store.applyFrame({ type: "state", ...state } as StateFrame);
    store.setReport((await metricsRes.json()) as MetricsReport);
  } catch (err) {
    console.warn("initial snapshot failed", err);
    store.addNotice("could not load the session snapshot; retrying over the socket");
  }

  client.connect();
  redraw();

  return {
    store,
    client,
    dom,
    sendCurrent,
    destroy: () => {
      unsubscribe();
      client.close();
    },
  };
}
