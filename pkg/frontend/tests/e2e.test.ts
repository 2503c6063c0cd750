/**
 * Live-server acceptance: keyboard-only completion of the drink-ordering
 * flow against the real back end with its embedded simulated bot.
 *
 * Spawns `kioskd` (Python) on an ephemeral port, joins its bot's session as
 * the phone, and drives the whole flow by focus traversal + Enter only,
 * asserting verbatim labels and a live-region announcement per screen change.
 */

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { WebSocket as NodeWebSocket } from "ws";

import { PhoneClient, ClientEvent } from "../src/client.js";
import { PhoneView } from "../src/view.js";

let server: ChildProcess | null = null;
let wsUrl = "";
let sessionId = "";

function waitForLine(proc: ChildProcess, pattern: RegExp, timeoutMs: number): Promise<RegExpExecArray> {
  return new Promise((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error(`timed out waiting for ${pattern}; got:\n${buffer}`)), timeoutMs);
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = pattern.exec(buffer);
      if (match) {
        clearTimeout(timer);
        resolve(match);
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early (${code}):\n${buffer}`));
    });
  });
}

beforeAll(async () => {
  const db = mkdtempSync(join(tmpdir(), "kioskdb-"));
  const gen = spawnSync(
    "python3",
    ["-c", `from kioskbot.fixtures import build_standard_db; build_standard_db(${JSON.stringify(db)})`],
    { stdio: "inherit" },
  );
  expect(gen.status).toBe(0);

  server = spawn(
    "python3",
    ["-m", "kioskbot.server.cli", "--db", db, "--port", "0", "--sim-bot", "menu_27in:corner"],
    { stdio: ["ignore", "pipe", "inherit"] },
  );
  const listening = await waitForLine(server, /WebSocket at (ws:\/\/[\d.]+:\d+\/ws)/, 90_000);
  wsUrl = listening[1];
  const session = await waitForLine(server, /sim bot session (\w+)/, 90_000);
  sessionId = session[1];
}, 120_000);

afterAll(() => {
  server?.kill("SIGINT");
});

function nextEvent(
  client: PhoneClient,
  match: (e: ClientEvent) => boolean,
  timeoutMs = 30_000,
): Promise<ClientEvent> {
  return new Promise((resolve, reject) => {
    const timer = setTimeout(() => {
      off();
      reject(new Error("timed out waiting for client event"));
    }, timeoutMs);
    const off = client.on((e) => {
      if (match(e)) {
        clearTimeout(timer);
        off();
        resolve(e);
      }
    });
  });
}

/** Keyboard-only activation: walk focus in document order, then press Enter. */
function activateByKeyboard(root: HTMLElement, label: string): void {
  const focusables = Array.from(
    root.querySelectorAll<HTMLElement>("button, a[href], [tabindex]"),
  ).filter((el) => el.tabIndex >= 0);
  expect(focusables.length).toBeGreaterThan(0);
  let target: HTMLElement | null = null;
  for (const el of focusables) {
    el.focus(); // each Tab stop
    expect(document.activeElement).toBe(el);
    expect(el.tagName).toBe("BUTTON"); // natively keyboard-operable
    if (el.textContent === label) {
      target = el;
      break;
    }
  }
  expect(target, `no focusable control labeled '${label}'`).not.toBeNull();
  target!.dispatchEvent(new KeyboardEvent("keydown", { key: "Enter", bubbles: true }));
}

describe("live bubble-tea flow, keyboard only", () => {
  it("completes the four-step order with announcements per screen change", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    const client = new PhoneClient(wsUrl, sessionId, (url) => new NodeWebSocket(url) as unknown as WebSocket);
    new PhoneView(root, client);
    const announcer = () => root.querySelector('[aria-live="polite"]')!.textContent ?? "";

    const firstTree = nextEvent(client, (e) => e.kind === "tree");
    client.connect();
    await firstTree;
    expect(client.state.tree!.screen_id).toBe("menu");

    // every label of the pushed tree appears verbatim in the document
    for (const item of client.state.tree!.items) {
      const nodes = Array.from(root.querySelectorAll("li > p, li > button"));
      expect(nodes.map((n) => n.textContent)).toContain(item.label);
    }

    const steps: Array<{ label: string; screen: string | null }> = [
      { label: "Avocado Tea", screen: "customize" },
      { label: "Half Sugar", screen: null },
      { label: "Add to Cart", screen: "cart" },
      { label: "Check Out", screen: "done" },
    ];
    for (const step of steps) {
      const outcome = step.screen
        ? nextEvent(client, (e) => e.kind === "tree" && e.changed)
        : nextEvent(client, (e) => e.kind === "pending" && !e.pending);
      activateByKeyboard(root, step.label);
      await outcome;
      if (step.screen) {
        expect(client.state.tree!.screen_id).toBe(step.screen);
        expect(announcer()).toBe(`Screen changed to ${step.screen}.`);
        for (const item of client.state.tree!.items) {
          const nodes = Array.from(root.querySelectorAll("li > p, li > button"));
          expect(nodes.map((n) => n.textContent)).toContain(item.label);
        }
      }
    }

    expect(client.state.tree!.screen_id).toBe("done");
    // the final screen is informational only: no buttons, still a labeled landmark
    expect(root.querySelectorAll('[role="region"] button')).toHaveLength(0);
    expect(root.querySelector('[role="region"]')!.getAttribute("aria-label")).toBe(
      "Kiosk screen: done",
    );
    client.close();
  }, 120_000);
});
