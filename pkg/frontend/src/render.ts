// Scene rendering: the view model plus its layout become an SVG string.
// Pure string construction keeps it testable without a DOM.

import { computeLayout, Layout } from "./layout.js";
import { deadlocked, ViewModel } from "./viewmodel.js";

function esc(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

const BOX_FILLS = ["#f7f5ef", "#eef3f7", "#f2eff7", "#eff7f0"];

export function renderScene(vm: ViewModel): string {
    if (!vm.model) {
        return `<svg class="scene" width="400" height="80"><text x="12" y="40">waiting for model…</text></svg>`;
    }
    const layout = computeLayout(vm.model);
    const parts: string[] = [];
    const margin = 12;
    const width = layout.width + 2 * margin;
    const height = layout.height + 2 * margin + 28;
    parts.push(
        `<svg class="scene" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">`,
    );
    parts.push(`<g transform="translate(${margin},${margin})">`);
    for (const box of vm.model.boxes.map((b) => layout.boxes.find((p) => p.id === b.id)!)) {
        const fill = BOX_FILLS[Math.max(0, box.depth) % BOX_FILLS.length];
        parts.push(
            `<rect class="box" data-box="${esc(box.id)}" x="${box.x}" y="${box.y}" ` +
                `width="${box.width}" height="${box.height}" rx="8" fill="${fill}" stroke="#667"/>`,
        );
        parts.push(
            `<text class="box-label" x="${box.x + 10}" y="${box.y + 17}">${esc(box.label)}</text>`,
        );
    }
    const place = new Map(layout.nodes.map((n) => [n.id, n]));
    for (const edge of vm.model.edges) {
        const a = place.get(edge.source);
        const b = place.get(edge.target);
        if (!a || !b) continue;
        parts.push(
            `<line class="edge" data-edge="${esc(edge.source)}--${esc(edge.target)}" ` +
                `x1="${a.cx}" y1="${a.cy}" x2="${b.cx}" y2="${b.cy}" stroke="#aab" stroke-dasharray="4 3"/>`,
        );
    }
    // the last fired label sits on the edge between its participants
    if (vm.lastEvent && vm.lastEvent.participants.length >= 1) {
        const ps = vm.lastEvent.participants
            .map((p) => place.get(p))
            .filter((p): p is NonNullable<typeof p> => Boolean(p));
        if (ps.length) {
            const cx = ps.reduce((acc, p) => acc + p.cx, 0) / ps.length;
            const cy = ps.reduce((acc, p) => acc + p.cy, 0) / ps.length - 10;
            parts.push(
                `<text class="event-label" x="${cx}" y="${cy}" text-anchor="middle">${esc(vm.lastEvent.label)}</text>`,
            );
        }
    }
    const highlighted = new Set(vm.highlighted);
    for (const node of layout.nodes) {
        const classes = ["node"];
        if (vm.terminated) classes.push("dimmed");
        else if (highlighted.has(node.id)) classes.push("enabled");
        parts.push(
            `<ellipse class="${classes.join(" ")}" data-node="${esc(node.id)}" ` +
                `cx="${node.cx}" cy="${node.cy}" rx="${node.rx}" ry="${node.ry}"/>`,
        );
        parts.push(
            `<text class="node-label" x="${node.cx}" y="${node.cy + 4}" text-anchor="middle">${esc(node.label)}</text>`,
        );
    }
    if (deadlocked(vm)) {
        parts.push(
            `<text class="badge deadlock" x="6" y="${layout.height + 22}">deadlock: no action enabled</text>`,
        );
    } else if (vm.terminated) {
        parts.push(
            `<text class="badge terminated" x="6" y="${layout.height + 22}">terminated</text>`,
        );
    }
    parts.push("</g></svg>");
    return parts.join("\n");
}

export { computeLayout };
export type { Layout };
