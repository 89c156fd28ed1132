// Session client: drives the protocol over any WebSocket-shaped transport,
// strictly one command in flight at a time.

import { ClientCommand, parseServerMessage, ServerMessage } from "./protocol.js";
import {
    applyMessage,
    initialViewModel,
    markPending,
    markStatus,
    ViewModel,
} from "./viewmodel.js";

export interface SocketLike {
    send(data: string): void;
    close(): void;
    onmessage: ((event: { data: string }) => void) | null;
    onopen: (() => void) | null;
    onclose: (() => void) | null;
    onerror: (() => void) | null;
}

export type Listener = (vm: ViewModel) => void;

export class SessionClient {
    vm: ViewModel = initialViewModel();
    private socket: SocketLike | null = null;
    private listeners: Listener[] = [];

    constructor(private makeSocket: () => SocketLike) {}

    subscribe(listener: Listener): void {
        this.listeners.push(listener);
        listener(this.vm);
    }

    private update(vm: ViewModel): void {
        this.vm = vm;
        for (const listener of this.listeners) listener(vm);
    }

    connect(): void {
        this.update(markStatus(initialViewModel(), "connecting"));
        let socket: SocketLike;
        try {
            socket = this.makeSocket();
        } catch (err) {
            this.update(markStatus(this.vm, "failed", `connection failed: ${err}`));
            return;
        }
        this.socket = socket;
        socket.onopen = () => this.update(markStatus(this.vm, "open"));
        socket.onerror = () =>
            this.update(markStatus(this.vm, "failed", "connection failed"));
        socket.onclose = () => {
            if (this.vm.status !== "failed") {
                this.update(markStatus(this.vm, "closed", "connection closed"));
            }
        };
        socket.onmessage = (event) => {
            let msg: ServerMessage;
            try {
                msg = parseServerMessage(event.data);
            } catch (err) {
                this.update(markStatus(this.vm, "open", String(err)));
                return;
            }
            this.update(applyMessage(this.vm, msg));
        };
    }

    /** true when a command may be sent right now */
    get ready(): boolean {
        return this.vm.status === "open" && !this.vm.pending && this.socket !== null;
    }

    private send(command: ClientCommand): boolean {
        if (!this.ready || !this.socket) return false;
        this.update(markPending(this.vm));
        this.socket.send(JSON.stringify(command));
        return true;
    }

    step(idx: number): boolean {
        return this.send({ type: "step", idx });
    }

    reset(): boolean {
        return this.send({ type: "reset" });
    }

    auto(steps: number, seed: number): boolean {
        return this.send({ type: "auto", steps, seed });
    }

    close(): void {
        this.socket?.close();
    }
}
