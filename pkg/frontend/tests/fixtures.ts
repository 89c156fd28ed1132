// Protocol exchanges captured from a live session on the two-component
// architecture example. Keys are the exact command JSON the client sends.

import type { ModelMessage, ServerMessage, StateMessage } from "../src/protocol.js";

export const MODEL: ModelMessage = {
    type: "model",
    boxes: [
        { id: "b0", label: "Application", parent: null },
        { id: "b1", label: "ApplicationSystem", parent: "b0" },
    ],
    nodes: [
        { id: "Component1", label: "Component1", box: "b1" },
        { id: "Component2", label: "Component2", box: "b1" },
        { id: "ArchitectureControl", label: "ArchitectureControl", box: "b0" },
        { id: "ArchitectureShutdown", label: "ArchitectureShutdown", box: "b0" },
    ],
    edges: [
        { source: "Component1", target: "Component2" },
        { source: "ArchitectureControl", target: "Component1" },
        { source: "ArchitectureControl", target: "ArchitectureShutdown" },
    ],
};

export const STATE0: StateMessage = {
    type: "state",
    stepNo: 0,
    enabled: [
        { idx: 0, label: "send-message", participants: ["Component1"] },
        { idx: 1, label: "stop", participants: ["Component1"] },
    ],
    highlighted: ["Component1"],
    terminated: false,
};

const STATE1: StateMessage = {
    type: "state",
    stepNo: 1,
    enabled: [
        {
            idx: 0,
            label: "comm(c1 >> c2, message)",
            participants: ["Component1", "Component2"],
        },
    ],
    highlighted: ["Component1", "Component2"],
    terminated: false,
};

const STATE2: StateMessage = {
    type: "state",
    stepNo: 2,
    enabled: [
        {
            idx: 0,
            label: "comm(c2 >> c1, ack)",
            participants: ["Component1", "Component2"],
        },
    ],
    highlighted: ["Component1", "Component2"],
    terminated: false,
};

const STATE3: StateMessage = { ...STATE0, stepNo: 3 };

export const ROUND_TRIP_STATES = [STATE1, STATE2, STATE3];

/** server responses per received command (a scripted session) */
export const SCRIPT: Record<string, ServerMessage[][]> = {
    '{"type":"step","idx":0}': [
        [
            { type: "event", label: "send-message", participants: ["Component1"] },
            STATE1,
        ],
        [
            {
                type: "event",
                label: "comm(c1 >> c2, message)",
                participants: ["Component1", "Component2"],
            },
            STATE2,
        ],
        [
            {
                type: "event",
                label: "comm(c2 >> c1, ack)",
                participants: ["Component1", "Component2"],
            },
            STATE3,
        ],
    ],
    '{"type":"step","idx":99}': [
        [{ type: "error", message: "choice 99 out of range (0..1)" }],
    ],
    '{"type":"reset"}': [[STATE0]],
};
