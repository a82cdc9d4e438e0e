// Browser entry point: wires the socket, the steering input, the 2-D HUD
// canvas, and the three.js context view together. All guidance numbers are
// taken from the service; this file only draws them.

import * as THREE from "three";

import { GuidanceClient, SessionState } from "./client.js";
import { DEFAULT_HUD, DisplayMode, HudConfig, hudState } from "./hud.js";
import { DEFAULT_STEER, SteerConfig, ToolPose, applySteer, makePose } from "./pose.js";
import { buildOverlay, buildTool } from "./scene.js";

const HUD_SIZE = 320;

interface UiSession {
  client: GuidanceClient;
  pose: ToolPose;
  displayMode: DisplayMode;
  steer: SteerConfig;
  hud: HudConfig;
}

function drawHud(canvas: HTMLCanvasElement, session: UiSession, state: SessionState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx || !state.lastFrame || !state.plan) return;
  const hud = hudState(state.lastFrame, state.plan.direction, Date.now(),
                       state.lastFrameAtMs, session.hud);
  const cx = canvas.width / 2;
  const cy = canvas.height / 2;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const color = hud.aligned ? "#33cc66" : "#cc8833";

  if (hud.entryCircleRadiusPx !== null && hud.targetCircleRadiusPx !== null) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, hud.entryCircleRadiusPx, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.arc(cx, cy, hud.targetCircleRadiusPx, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([]);
    if (hud.arrowDirPx) {
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.lineTo(cx + hud.arrowDirPx[0] * hud.arrowLengthPx,
                 cy + hud.arrowDirPx[1] * hud.arrowLengthPx);
      ctx.stroke();
    }
  } else {
    ctx.fillStyle = "#cc3333";
    ctx.fillText("tool too oblique: offsets unavailable", 10, cy);
  }

  ctx.fillStyle = color;
  ctx.font = "16px monospace";
  ctx.fillText(`depth ${hud.depthText}`, 10, 20);
  ctx.fillText(`angle ${hud.angleText}`, 10, 40);
  if (hud.stale) {
    ctx.fillStyle = "#cc3333";
    ctx.fillText("STALE", canvas.width - 60, 20);
  }
}

function sendPoses(session: UiSession, poses: ToolPose[]): void {
  for (const pose of poses) {
    session.pose = pose;
    session.client.sendPose(pose);
  }
}

export function start(root: HTMLElement, socketUrl = "ws://127.0.0.1:8765"): void {
  const hudCanvas = document.createElement("canvas");
  hudCanvas.width = HUD_SIZE;
  hudCanvas.height = HUD_SIZE;
  root.appendChild(hudCanvas);

  const banner = document.createElement("div");
  banner.textContent = "connecting";
  root.appendChild(banner);

  const renderer = new THREE.WebGLRenderer({ antialias: true });
  renderer.setSize(640, 480);
  root.appendChild(renderer.domElement);
  const scene = new THREE.Scene();
  const camera = new THREE.PerspectiveCamera(50, 640 / 480, 1, 2000);
  camera.position.set(0, -400, 150);
  camera.lookAt(0, 0, 0);

  let overlayGroup: THREE.Group | null = null;
  let toolGroup: THREE.Group | null = null;

  const session: UiSession = {
    client: new GuidanceClient(new WebSocket(socketUrl), (state) => {
      banner.textContent = state.connected ? "" : "disconnected: reconnect to resume";
      if (state.overlay && session.displayMode !== "tool_tracking") {
        if (overlayGroup) scene.remove(overlayGroup);
        overlayGroup = buildOverlay(state.overlay);
        scene.add(overlayGroup);
      }
      if (session.displayMode !== "in_situ") drawHud(hudCanvas, session, state);
      if (toolGroup) scene.remove(toolGroup);
      toolGroup = buildTool(session.pose.tip, session.pose.direction);
      scene.add(toolGroup);
      renderer.render(scene, camera);
    }),
    pose: makePose([0, 0, 200], [0, 0, -1]),
    displayMode: "both",
    steer: DEFAULT_STEER,
    hud: DEFAULT_HUD,
  };

  hudCanvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    sendPoses(session, applySteer(session.pose,
      { type: "scroll", steps: ev.deltaY < 0 ? 1 : -1 }, session.steer));
  });

  let dragging = false;
  hudCanvas.addEventListener("mousedown", () => { dragging = true; });
  window.addEventListener("mouseup", () => { dragging = false; });
  hudCanvas.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    sendPoses(session, applySteer(session.pose,
      { type: "drag", dxPx: ev.movementX, dyPx: ev.movementY }, session.steer));
  });

  window.addEventListener("keydown", (ev) => {
    const tilts: Record<string, { axis: "pitch" | "yaw"; sign: 1 | -1 }> = {
      ArrowUp: { axis: "pitch", sign: 1 },
      ArrowDown: { axis: "pitch", sign: -1 },
      ArrowLeft: { axis: "yaw", sign: -1 },
      ArrowRight: { axis: "yaw", sign: 1 },
    };
    const tilt = tilts[ev.key];
    if (tilt) {
      sendPoses(session, applySteer(session.pose, { type: "tilt", ...tilt }, session.steer));
    } else if (ev.key === "m") {
      const modes: DisplayMode[] = ["tool_tracking", "in_situ", "both"];
      session.displayMode = modes[(modes.indexOf(session.displayMode) + 1) % 3] ?? "both";
    }
  });
}
