/**
 * Accessible rendering of the kiosk's UI tree.
 *
 * One labeled landmark region per screen; texts are plain paragraphs,
 * actions are native buttons carrying the database label verbatim, in tree
 * order. Every state change is spoken through a polite live region, and
 * focus lands on the new screen's first item whenever the screen changes.
 */

import { PhoneClient, ClientEvent } from "./client.js";
import { ErrorMsg, UITreeMsg } from "./protocol.js";

const ERROR_GUIDANCE: Record<string, string> = {
  RELOCATION_REQUIRED:
    "The button you chose is under the bot. Move the bot to a clear spot on the screen; " +
    "it will find its place again and the menu will return.",
  UNRECOGNIZED_SCREEN:
    "The bot could not recognize this screen. Check that it sits flat on the kiosk, then try again.",
  OUT_OF_REACH: "That button is too far for the bot's arm from where it sits. Move the bot closer.",
  INTERNAL: "Something went wrong. Please try again.",
};

export class PhoneView {
  private readonly announcer: HTMLElement;
  private readonly region: HTMLElement;
  private readonly notice: HTMLElement;
  private lastAnnouncement = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly client: PhoneClient,
    private readonly onRetry: () => void = () => {},
  ) {
    this.announcer = document.createElement("div");
    this.announcer.setAttribute("role", "status");
    this.announcer.setAttribute("aria-live", "polite");
    this.announcer.className = "announcer";

    this.region = document.createElement("section");
    this.region.setAttribute("role", "region");
    this.region.setAttribute("aria-label", "Kiosk screen");

    this.notice = document.createElement("div");
    this.notice.className = "notice";

    const main = document.createElement("main");
    main.append(this.announcer, this.notice, this.region);
    this.root.append(main);

    this.renderEmpty("Connecting to the kiosk.");
    client.on((event) => this.onEvent(event));
  }

  announce(message: string): void {
    // re-setting identical text is not re-spoken by screen readers
    this.lastAnnouncement = message === this.lastAnnouncement ? message + " " : message;
    this.announcer.textContent = this.lastAnnouncement;
  }

  private onEvent(event: ClientEvent): void {
    switch (event.kind) {
      case "tree":
        this.notice.replaceChildren();
        this.renderTree(event.tree);
        if (event.changed) {
          this.announce(`Screen changed to ${event.tree.screen_id}.`);
        } else {
          this.announce(`Showing the ${event.tree.screen_id} screen.`);
        }
        this.focusFirstItem();
        break;
      case "pending":
        this.region.setAttribute("aria-busy", event.pending ? "true" : "false");
        for (const b of this.buttons()) {
          b.setAttribute("aria-disabled", event.pending ? "true" : "false");
        }
        if (event.pending) this.announce("Working.");
        break;
      case "announce":
        this.announce(event.message);
        break;
      case "error":
        this.renderError(event.error);
        break;
      case "status":
        if (event.status === "connected") this.announce("Connected.");
        break;
    }
  }

  private renderEmpty(message: string): void {
    const p = document.createElement("p");
    p.textContent = message;
    this.region.replaceChildren(p);
  }

  private renderTree(tree: UITreeMsg): void {
    this.region.setAttribute("aria-label", `Kiosk screen: ${tree.screen_id}`);
    const heading = document.createElement("h2");
    heading.textContent = tree.screen_id;

    if (tree.items.length === 0) {
      this.region.replaceChildren(heading);
      this.renderEmpty("No actions available on this screen.");
      this.region.prepend(heading);
      return;
    }

    const list = document.createElement("ul");
    list.className = "items";
    for (const item of tree.items) {
      const li = document.createElement("li");
      if (item.role === "button") {
        const button = document.createElement("button");
        button.type = "button";
        button.textContent = item.label;
        button.dataset.elementId = item.element_id;
        if (!item.enabled) button.setAttribute("aria-disabled", "true");
        button.addEventListener("click", () => this.client.select(item.element_id));
        button.addEventListener("keydown", (ev: KeyboardEvent) => {
          if (ev.key === "Enter" || ev.key === " ") {
            ev.preventDefault();
            button.click();
          }
        });
        li.append(button);
      } else {
        const p = document.createElement("p");
        p.textContent = item.label;
        li.append(p);
      }
      list.append(li);
    }
    this.region.replaceChildren(heading, list);
  }

  private renderError(error: ErrorMsg): void {
    const guidance = ERROR_GUIDANCE[error.code] ?? ERROR_GUIDANCE.INTERNAL;
    this.announce(guidance);

    const block = document.createElement("div");
    block.setAttribute("role", "group");
    block.setAttribute("aria-label", "Problem");
    const text = document.createElement("p");
    text.textContent = guidance;
    block.append(text);
    if (error.code === "RELOCATION_REQUIRED" || error.code === "UNRECOGNIZED_SCREEN") {
      const retry = document.createElement("button");
      retry.type = "button";
      retry.textContent = "Check again";
      retry.dataset.action = "retry";
      retry.addEventListener("click", () => this.onRetry());
      block.append(retry);
    }
    this.notice.replaceChildren(block);
    const retryButton = this.notice.querySelector<HTMLButtonElement>("button");
    retryButton?.focus();
  }

  private buttons(): HTMLButtonElement[] {
    return Array.from(this.region.querySelectorAll("button"));
  }

  private focusFirstItem(): void {
    const first = this.region.querySelector<HTMLElement>("li > button, li > p");
    if (!first) return;
    if (first.tagName !== "BUTTON") first.setAttribute("tabindex", "-1");
    first.focus();
  }
}
