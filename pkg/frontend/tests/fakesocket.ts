// A loopback transport replaying a scripted session, delivering messages
// asynchronously like a real socket.

import type { ServerMessage } from "../src/protocol.js";
import type { SocketLike } from "../src/client.js";

export class FakeSocket implements SocketLike {
    onmessage: ((event: { data: string }) => void) | null = null;
    onopen: (() => void) | null = null;
    onclose: (() => void) | null = null;
    onerror: (() => void) | null = null;
    sent: string[] = [];
    closed = false;

    constructor(
        private greeting: ServerMessage[],
        private script: Record<string, ServerMessage[][]>,
        private uses: Record<string, number> = {},
    ) {
        queueMicrotask(() => {
            this.onopen?.();
            this.deliver(this.greeting);
        });
    }

    private deliver(messages: ServerMessage[]): void {
        for (const msg of messages) {
            queueMicrotask(() => this.onmessage?.({ data: JSON.stringify(msg) }));
        }
    }

    send(data: string): void {
        this.sent.push(data);
        const canned = this.script[data];
        if (!canned) {
            throw new Error(`fake socket has no script for ${data}`);
        }
        const n = this.uses[data] ?? 0;
        this.uses[data] = n + 1;
        this.deliver(canned[Math.min(n, canned.length - 1)]);
    }

    close(): void {
        this.closed = true;
        this.onclose?.();
    }
}

export function flush(): Promise<void> {
    // drain the microtask queue a few times so chained deliveries settle
    return new Promise((resolve) => setTimeout(resolve, 0));
}
