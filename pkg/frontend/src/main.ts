// Browser entry point: wires the session client to the DOM.

import { SessionClient, SocketLike } from "./client.js";
import { renderScene } from "./render.js";
import { deadlocked, ViewModel } from "./viewmodel.js";

function wsUrl(): string {
    const proto = location.protocol === "https:" ? "wss" : "ws";
    return `${proto}://${location.host}/ws`;
}

function makeBrowserSocket(): SocketLike {
    return new WebSocket(wsUrl()) as unknown as SocketLike;
}

function el<T extends HTMLElement>(id: string): T {
    const found = document.getElementById(id);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
}

export function mount(client: SessionClient): void {
    const scene = el<HTMLDivElement>("scene");
    const choices = el<HTMLDivElement>("choices");
    const trace = el<HTMLOListElement>("trace");
    const banner = el<HTMLDivElement>("banner");
    const status = el<HTMLSpanElement>("status");
    const stepNo = el<HTMLSpanElement>("step-no");
    const resetBtn = el<HTMLButtonElement>("reset");
    const autoBtn = el<HTMLButtonElement>("auto");
    const autoSteps = el<HTMLInputElement>("auto-steps");
    const autoSeed = el<HTMLInputElement>("auto-seed");
    const retryBtn = el<HTMLButtonElement>("retry");

    resetBtn.onclick = () => client.reset();
    retryBtn.onclick = () => client.connect();
    autoBtn.onclick = () =>
        client.auto(
            parseInt(autoSteps.value, 10) || 10,
            parseInt(autoSeed.value, 10) || 0,
        );

    client.subscribe((vm: ViewModel) => {
        scene.innerHTML = renderScene(vm);
        status.textContent = vm.status;
        status.className = `status ${vm.status}`;
        stepNo.textContent = String(vm.stepNo);

        banner.textContent = vm.banner ?? "";
        banner.style.display = vm.banner ? "block" : "none";
        retryBtn.style.display =
            vm.status === "failed" || vm.status === "closed" ? "inline-block" : "none";

        const busy = !client.ready;
        resetBtn.disabled = busy;
        autoBtn.disabled = busy;

        choices.innerHTML = "";
        if (vm.terminated) {
            choices.textContent = "terminated";
        } else if (deadlocked(vm)) {
            choices.textContent = "deadlock";
        }
        for (const choice of vm.enabled) {
            const btn = document.createElement("button");
            btn.className = "choice";
            btn.textContent = `${choice.label}  (${choice.participants.join(", ")})`;
            btn.disabled = busy;
            btn.onclick = () => client.step(choice.idx);
            choices.appendChild(btn);
        }

        trace.innerHTML = "";
        for (const line of vm.trace) {
            const item = document.createElement("li");
            item.textContent = `${line.label}  [${line.participants.join(", ")}]`;
            trace.appendChild(item);
        }
        trace.scrollTop = trace.scrollHeight;
    });

    client.connect();
}

if (typeof document !== "undefined" && document.getElementById("scene")) {
    mount(new SessionClient(makeBrowserSocket));
}
