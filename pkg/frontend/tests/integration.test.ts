// End-to-end against the real backend: spawns both Python services via the
// shipped CLI, then drives the dashboard view-model layer exactly as the UI
// would. Requires the Python package installed (pip install -e ..).

import { spawn, ChildProcess } from "node:child_process";
import { createHash, randomBytes } from "node:crypto";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AuthClient, DataClient } from "../src/api.js";
import {
  buildConsentPrompt,
  decideConsent,
  externalGrantRows,
  renderDatasetView,
  revokeGrant,
} from "../src/dashboard/viewmodel.js";
import { httpTransport } from "../src/extension/queue.js";
import type { RecorderSettings } from "../src/extension/capture.js";
import type { PageCapture } from "../src/types.js";

const USER = "persona-001";
const PASSWORD = "integration-pass";
const RECORDER_SECRET = "integration-secret";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port assigned"));
      }
    });
  });
}

async function waitFor(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(url);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error(`timeout waiting for ${url}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
}

function b64url(buffer: Buffer): string {
  return buffer.toString("base64url");
}

const CAPTURES: PageCapture[] = [1, 2, 3].map((n) => ({
  url: `https://example.net/integration/page-${n}`,
  title: `Integration page ${n}`,
  html_body: `<html><body><p>Comparing hotels and accommodations near the onsen town, day ${n}. Golf in the morning. Relaxing baths at night.</p></body></html>`,
  captured_at: `2026-05-12T09:0${n}:00.000Z`,
  user_id: USER,
}));

describe("dashboard against live services", () => {
  let child: ChildProcess | null = null;
  let dataDir = "";
  let issuer = "";
  let dataUrl = "";
  let settings: RecorderSettings;

  beforeAll(async () => {
    const authPort = await freePort();
    const dataPort = await freePort();
    issuer = `http://127.0.0.1:${authPort}`;
    dataUrl = `http://127.0.0.1:${dataPort}`;
    dataDir = mkdtempSync(join(tmpdir(), "puda-frontend-"));
    settings = {
      ingestUrl: `${dataUrl}/ingest/page`,
      recorderSecret: RECORDER_SECRET,
      userId: USER,
      blocklist: [],
    };

    child = spawn("python3", ["-m", "puda.cli", "serve", "--all"], {
      env: {
        ...process.env,
        PUDA_DATA_DIR: dataDir,
        PUDA_ISSUER: issuer,
        PUDA_AUTH_ISSUER: issuer,
        PUDA_LISTEN_ADDR: `127.0.0.1:${dataPort}`,
        PUDA_RECORDER_SECRET: RECORDER_SECRET,
        PUDA_LOCAL_USER: USER,
        PUDA_LOCAL_PASSWORD: PASSWORD,
      },
      stdio: ["ignore", "pipe", "pipe"],
    });
    await waitFor(`${issuer}/healthz`, 30_000);
    await waitFor(`${dataUrl}/healthz`, 30_000);

    // load data through the recorder transport, then rebuild
    await fetch(`${dataUrl}/users/${USER}/profile`, {
      method: "PUT",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${RECORDER_SECRET}`,
      },
      body: JSON.stringify({
        name: "Aiko Tanaka",
        age: 34,
        date_of_birth: "1992-02-14",
        gender: "female",
        address: "Tokyo",
      }),
    });
    for (const capture of CAPTURES) {
      const outcome = await httpTransport(capture, settings);
      expect(outcome.ok).toBe(true);
    }
    const rebuild = await fetch(`${dataUrl}/rebuild/${USER}`, {
      method: "POST",
      headers: { Authorization: `Bearer ${RECORDER_SECRET}` },
    });
    expect(rebuild.status).toBe(200);

    // wait for the dataset agent's bootstrap registration to finish
    const auth = new AuthClient(issuer);
    const session = await auth.openSession(USER, PASSWORD);
    const deadline = Date.now() + 20_000;
    for (;;) {
      const token = (await auth.sessionToken(session, ["puda:profile"])).access_token;
      const probe = await fetch(`${dataUrl}/data/profile`, {
        headers: { Authorization: `Bearer ${token}` },
      });
      if (probe.status === 200) {
        break;
      }
      if (Date.now() > deadline) {
        throw new Error(`dataset agent never became ready (${probe.status})`);
      }
      await new Promise((resolve) => setTimeout(resolve, 400));
    }
  }, 90_000);

  afterAll(() => {
    child?.kill("SIGKILL");
    if (dataDir) {
      rmSync(dataDir, { recursive: true, force: true });
    }
  });

  it(
    "partial approval issues exactly the approved subset; previews byte-equal provision payloads",
    async () => {
      const auth = new AuthClient(issuer);
      const data = new DataClient(dataUrl);
      const session = await auth.openSession(USER, PASSWORD);

      // the external agent starts an authorization request
      const registration = await (
        await fetch(`${issuer}/register/client`, {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify({
            client_name: "integration-agent",
            redirect_uris: ["https://agent.example/cb"],
          }),
        })
      ).json();
      const verifier = b64url(randomBytes(32));
      const challenge = b64url(createHash("sha256").update(verifier, "ascii").digest());
      const authorizeUrl = new URL(`${issuer}/authorize`);
      authorizeUrl.search = new URLSearchParams({
        response_type: "code",
        client_id: registration.client_id,
        redirect_uri: "https://agent.example/cb",
        scope: "puda:profile puda:keywords:085",
        state: "integration-state",
        code_challenge: challenge,
        code_challenge_method: "S256",
      }).toString();
      const pending = await (await fetch(authorizeUrl)).json();
      expect(pending.status).toBe("pending");

      // the dashboard shows the prompt with previews, user approves profile only
      const prompt = await buildConsentPrompt(auth, data, session, pending.request_id);
      expect(prompt.rows.map((row) => row.scope)).toEqual([
        "puda:profile",
        "puda:keywords:085",
      ]);
      const redirect = await decideConsent(auth, session, prompt, {
        "puda:profile": true,
        "puda:keywords:085": false,
      });
      const redirectUrl = new URL(redirect);
      expect(redirectUrl.searchParams.get("state")).toBe("integration-state");
      const code = redirectUrl.searchParams.get("code");
      expect(code).toBeTruthy();

      // the agent exchanges the code; the token carries exactly the approved subset
      const tokenResponse = await fetch(`${issuer}/token`, {
        method: "POST",
        headers: { "Content-Type": "application/x-www-form-urlencoded" },
        body: new URLSearchParams({
          grant_type: "authorization_code",
          code: code!,
          client_id: registration.client_id,
          code_verifier: verifier,
          redirect_uri: "https://agent.example/cb",
        }).toString(),
      });
      expect(tokenResponse.status).toBe(200);
      const tokenBody = await tokenResponse.json();
      expect(tokenBody.scope).toBe("puda:profile");

      // the denied scope stays closed, the approved one opens
      const denied = await fetch(`${dataUrl}/data/keywords/085`, {
        headers: { Authorization: `Bearer ${tokenBody.access_token}` },
      });
      expect(denied.status).toBe(403);
      const allowed = await fetch(`${dataUrl}/data/profile`, {
        headers: { Authorization: `Bearer ${tokenBody.access_token}` },
      });
      expect(allowed.status).toBe(200);
      const agentPayload = await allowed.text();

      // dashboard preview bytes equal what the agent receives for the scope
      const promptPreview = prompt.rows.find((row) => row.scope === "puda:profile")!.preview;
      expect(promptPreview).toBe(agentPayload);

      // dataset tabs render the same payloads a scoped agent would get
      const keywordsView = await renderDatasetView(auth, data, session, {
        tab: "keywords",
        keywordsThreshold: 0.86,
      });
      expect(keywordsView.scope).toBe("puda:keywords:085");
      const keywordsPreview = prompt.rows.find((row) => row.scope === "puda:keywords:085")!;
      expect(keywordsView.payload).toBe(keywordsPreview.preview);

      // grants list shows the new grant; revoking flips its status
      const before = externalGrantRows(await auth.listGrants(session));
      const grant = before.find((row) => row.clientName === "integration-agent");
      expect(grant).toBeDefined();
      expect(grant!.status).toBe("active");
      const afterRevoke = await revokeGrant(auth, session, grant!.grantId);
      expect(afterRevoke.status).toBe("revoked");
    },
    60_000,
  );
});
