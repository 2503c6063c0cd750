/**
 * Entry point: wire the client and view from URL query parameters.
 *
 *   ?server=ws://host:port/ws   message channel (default: same host, /ws)
 *   ?session=<id>               session to join (from the bot's pairing step)
 *   ?dev=1                      developer overlay with the bot's position
 */

import { PhoneClient } from "./client.js";
import { PhoneView } from "./view.js";

function defaultServerUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}

function setupDevPanel(root: HTMLElement, client: PhoneClient): void {
  const panel = document.createElement("div");
  panel.className = "dev-panel";
  panel.setAttribute("aria-hidden", "true");
  const map = document.createElement("div");
  map.className = "dev-map";
  const dot = document.createElement("div");
  dot.className = "dev-dot";
  const label = document.createElement("div");
  map.append(dot);
  panel.append(label, map);
  root.append(panel);

  client.on(() => {
    const loc = client.state.lastLocation;
    if (!loc) return;
    label.textContent =
      `bot at (${loc.x_mm.toFixed(1)}, ${loc.y_mm.toFixed(1)}) mm, ` +
      `heading ${loc.orientation_deg.toFixed(1)} deg`;
    // scale assumes screens up to 900 x 500 mm; dev aid only
    dot.style.left = `${Math.min(100, (loc.x_mm / 900) * 100)}%`;
    dot.style.top = `${Math.min(100, (loc.y_mm / 500) * 100)}%`;
  });
}

function boot(): void {
  const params = new URLSearchParams(location.search);
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const client = new PhoneClient(
    params.get("server") ?? defaultServerUrl(),
    params.get("session"),
  );
  const view = new PhoneView(root, client, () => {
    client.close();
    client.connect();
  });
  void view;
  if (params.get("dev") === "1") setupDevPanel(root, client);
  client.connect();
}

boot();
