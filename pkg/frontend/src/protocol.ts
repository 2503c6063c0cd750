/** Wire types for the server's JSON message schema. One message per WebSocket text frame. */

export type Role = "bot" | "phone" | "server";

export interface UITreeItem {
  element_id: string;
  role: "text" | "button";
  label: string;
  enabled: boolean;
}

export interface UITreeMsg {
  type: "ui";
  screen_id: string;
  items: UITreeItem[];
}

export interface HelloMsg {
  type: "hello";
  role: Role;
  session_id?: string;
}

export interface LocationMsg {
  type: "location";
  x_mm: number;
  y_mm: number;
  orientation_deg: number;
  residual_mm: number;
}

export interface TouchDoneMsg {
  type: "touch_done";
  hit: string | null;
  screen_changed: boolean;
}

export type ReasonCode =
  | "UNRECOGNIZED_SCREEN"
  | "RELOCATION_REQUIRED"
  | "OUT_OF_REACH"
  | "INTERNAL";

export interface ErrorMsg {
  type: "error";
  code: ReasonCode;
  detail?: string;
}

export interface SelectMsg {
  type: "select";
  session_id: string;
  element_id: string;
}

export type ServerMsg = HelloMsg | UITreeMsg | LocationMsg | TouchDoneMsg | ErrorMsg;

export function parseServerMsg(raw: string): ServerMsg | null {
  try {
    const msg = JSON.parse(raw);
    if (msg && typeof msg === "object" && typeof msg.type === "string") {
      return msg as ServerMsg;
    }
  } catch {
    /* not JSON */
  }
  return null;
}
