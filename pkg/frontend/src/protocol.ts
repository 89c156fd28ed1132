// Wire protocol of the simulator session: one JSON object per WebSocket
// frame. Field names are part of the contract.

export interface BoxSpec {
    id: string;
    label: string;
    parent: string | null;
}

export interface NodeSpec {
    id: string;
    label: string;
    box: string | null;
}

export interface EdgeSpec {
    source: string;
    target: string;
}

export interface ModelMessage {
    type: "model";
    boxes: BoxSpec[];
    nodes: NodeSpec[];
    edges: EdgeSpec[];
}

export interface EnabledChoice {
    idx: number;
    label: string;
    participants: string[];
}

export interface StateMessage {
    type: "state";
    stepNo: number;
    enabled: EnabledChoice[];
    highlighted: string[];
    terminated: boolean;
}

export interface EventMessage {
    type: "event";
    label: string;
    participants: string[];
}

export interface ErrorMessage {
    type: "error";
    message: string;
}

export type ServerMessage = ModelMessage | StateMessage | EventMessage | ErrorMessage;

export type ClientCommand =
    | { type: "step"; idx: number }
    | { type: "reset" }
    | { type: "auto"; steps: number; seed: number };

export function parseServerMessage(raw: string): ServerMessage {
    const data = JSON.parse(raw);
    if (
        data &&
        (data.type === "model" ||
            data.type === "state" ||
            data.type === "event" ||
            data.type === "error")
    ) {
        return data as ServerMessage;
    }
    throw new Error(`unknown server message: ${raw.slice(0, 120)}`);
}
