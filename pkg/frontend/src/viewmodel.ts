// The view model mirrors server-sent state; nothing here computes process
// semantics. Every displayed fact traces back to a received message.

import type {
    EnabledChoice,
    ModelMessage,
    ServerMessage,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed" | "failed";

export interface TraceLine {
    stepNo: number;
    label: string;
    participants: string[];
}

export interface ViewModel {
    status: ConnectionStatus;
    model: ModelMessage | null;
    stepNo: number;
    enabled: EnabledChoice[];
    highlighted: string[];
    terminated: boolean;
    lastEvent: TraceLine | null;
    trace: TraceLine[];
    pending: boolean; // a command is in flight; controls disabled
    banner: string | null; // inline error/connection notice
}

export function initialViewModel(): ViewModel {
    return {
        status: "connecting",
        model: null,
        stepNo: 0,
        enabled: [],
        highlighted: [],
        terminated: false,
        lastEvent: null,
        trace: [],
        pending: false,
        banner: null,
    };
}

export function applyMessage(vm: ViewModel, msg: ServerMessage): ViewModel {
    switch (msg.type) {
        case "model":
            return { ...vm, model: msg, banner: null };
        case "state": {
            const reset = msg.stepNo === 0;
            return {
                ...vm,
                stepNo: msg.stepNo,
                enabled: msg.enabled,
                highlighted: msg.highlighted,
                terminated: msg.terminated,
                pending: false,
                trace: reset ? [] : vm.trace,
                lastEvent: reset ? null : vm.lastEvent,
            };
        }
        case "event": {
            const line: TraceLine = {
                stepNo: vm.stepNo,
                label: msg.label,
                participants: msg.participants,
            };
            return { ...vm, lastEvent: line, trace: [...vm.trace, line] };
        }
        case "error":
            return { ...vm, pending: false, banner: msg.message };
    }
}

export function markPending(vm: ViewModel): ViewModel {
    return { ...vm, pending: true, banner: null };
}

export function markStatus(vm: ViewModel, status: ConnectionStatus, banner?: string): ViewModel {
    return { ...vm, status, banner: banner ?? vm.banner, pending: false };
}

export function deadlocked(vm: ViewModel): boolean {
    return vm.model !== null && !vm.terminated && vm.enabled.length === 0;
}
