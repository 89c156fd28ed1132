// Deterministic, force-free geometry for the animation model: boxes nest by
// the server-sent parent links, ellipses sit on a grid inside their box.

import type { ModelMessage } from "./protocol.js";

export const NODE_W = 170;
export const NODE_H = 54;
const PAD = 18;
const TITLE_H = 24;
const GAP = 14;

export interface NodePlacement {
    id: string;
    label: string;
    cx: number;
    cy: number;
    rx: number;
    ry: number;
}

export interface BoxPlacement {
    id: string;
    label: string;
    x: number;
    y: number;
    width: number;
    height: number;
    depth: number;
}

export interface Layout {
    width: number;
    height: number;
    boxes: BoxPlacement[];
    nodes: NodePlacement[];
}

interface Sized {
    width: number;
    height: number;
    place(x: number, y: number, out: Layout, depth: number): void;
}

export function computeLayout(model: ModelMessage): Layout {
    const children = new Map<string | null, string[]>();
    for (const box of model.boxes) {
        const list = children.get(box.parent) ?? [];
        list.push(box.id);
        children.set(box.parent, list);
    }
    const nodesIn = new Map<string | null, typeof model.nodes>();
    for (const node of model.nodes) {
        const list = nodesIn.get(node.box) ?? [];
        list.push(node);
        nodesIn.set(node.box, list);
    }
    const byId = new Map(model.boxes.map((b) => [b.id, b]));

    function sizeBox(id: string | null): Sized {
        const items: Sized[] = [];
        for (const childId of children.get(id) ?? []) {
            items.push(sizeBox(childId));
        }
        for (const node of nodesIn.get(id) ?? []) {
            items.push({
                width: NODE_W,
                height: NODE_H,
                place(x, y, out) {
                    out.nodes.push({
                        id: node.id,
                        label: node.label,
                        cx: x + NODE_W / 2,
                        cy: y + NODE_H / 2,
                        rx: NODE_W / 2,
                        ry: NODE_H / 2,
                    });
                },
            });
        }
        // grid: near-square column count, rows sized to their tallest item
        const columns = Math.max(1, Math.ceil(Math.sqrt(items.length)));
        const rows: Sized[][] = [];
        for (let i = 0; i < items.length; i += columns) {
            rows.push(items.slice(i, i + columns));
        }
        const rowHeights = rows.map((row) => Math.max(...row.map((s) => s.height)));
        const rowWidths = rows.map(
            (row) => row.reduce((acc, s) => acc + s.width, 0) + GAP * (row.length - 1),
        );
        const innerW = Math.max(NODE_W, ...rowWidths);
        const innerH =
            rowHeights.reduce((a, b) => a + b, 0) + GAP * Math.max(0, rows.length - 1);
        const label = id === null ? "" : byId.get(id)?.label ?? id;
        const titled = id === null ? 0 : TITLE_H;
        return {
            width: innerW + 2 * PAD,
            height: innerH + 2 * PAD + titled,
            place(x, y, out, depth) {
                if (id !== null) {
                    out.boxes.push({
                        id,
                        label,
                        x,
                        y,
                        width: innerW + 2 * PAD,
                        height: innerH + 2 * PAD + titled,
                        depth,
                    });
                }
                let cy = y + PAD + titled;
                for (let r = 0; r < rows.length; r += 1) {
                    let cx = x + PAD;
                    for (const item of rows[r]) {
                        item.place(cx, cy, out, depth + 1);
                        cx += item.width + GAP;
                    }
                    cy += rowHeights[r] + GAP;
                }
            },
        };
    }

    const root = sizeBox(null);
    const layout: Layout = {
        width: root.width,
        height: root.height,
        boxes: [],
        nodes: [],
    };
    root.place(0, 0, layout, -1);
    return layout;
}
