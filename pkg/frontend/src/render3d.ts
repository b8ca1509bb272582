// three.js adapter: builds meshes once per render-node key and applies the
// latest snapshot's poses each animation frame. Render state is always the
// last snapshot, never a local extrapolation.
import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";
import { RenderNode } from "./scenegraph";

function makeGeometry(node: RenderNode): THREE.BufferGeometry {
  switch (node.shape) {
    case "box":
      return new THREE.BoxGeometry(node.size[0], node.size[1], node.size[2]);
    case "sphere":
      return new THREE.SphereGeometry(node.size[0], 24, 16);
    case "cylinder": {
      // URDF cylinders extend along z; three's extend along y
      const geom = new THREE.CylinderGeometry(node.size[0], node.size[0], node.size[1], 24);
      geom.rotateX(Math.PI / 2);
      return geom;
    }
    default:
      return new THREE.BoxGeometry(0.05, 0.05, 0.05);
  }
}

export class WorkbenchRenderer {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly renderer: THREE.WebGLRenderer;
  readonly controls: OrbitControls;
  private meshes = new Map<string, THREE.Mesh>();
  private raycaster = new THREE.Raycaster();

  constructor(container: HTMLElement) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    container.appendChild(this.renderer.domElement);

    this.camera = new THREE.PerspectiveCamera(
      55, container.clientWidth / container.clientHeight, 0.01, 50);
    // z-up world, matching the engine's frames
    this.camera.up.set(0, 0, 1);
    this.camera.position.set(1.8, -1.4, 1.2);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.set(0, 0, 0.4);

    this.scene.background = new THREE.Color("#1c2128");
    const grid = new THREE.GridHelper(4, 20, 0x3d4450, 0x2a3038);
    grid.rotation.x = Math.PI / 2;
    this.scene.add(grid);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.4);
    sun.position.set(2, -3, 4);
    this.scene.add(sun);

    window.addEventListener("resize", () => {
      this.camera.aspect = container.clientWidth / container.clientHeight;
      this.camera.updateProjectionMatrix();
      this.renderer.setSize(container.clientWidth, container.clientHeight);
    });
  }

  apply(nodes: RenderNode[]): void {
    const seen = new Set<string>();
    for (const node of nodes) {
      seen.add(node.key);
      let mesh = this.meshes.get(node.key);
      if (!mesh) {
        mesh = new THREE.Mesh(
          makeGeometry(node),
          new THREE.MeshStandardMaterial({
            color: node.color,
            transparent: node.opacity < 1,
            opacity: node.opacity,
            roughness: 0.65,
          }),
        );
        mesh.userData.key = node.key;
        this.meshes.set(node.key, mesh);
        this.scene.add(mesh);
      }
      mesh.position.set(node.position[0], node.position[1], node.position[2]);
      mesh.quaternion.set(
        node.quaternion[0], node.quaternion[1], node.quaternion[2], node.quaternion[3]);
      const material = mesh.material as THREE.MeshStandardMaterial;
      material.opacity = node.opacity;
      material.color.set(node.color);
    }
    for (const [key, mesh] of this.meshes) {
      if (!seen.has(key)) {
        this.scene.remove(mesh);
        this.meshes.delete(key);
      }
    }
  }

  /** Render-node key under the pointer, for drag picking. */
  pick(clientX: number, clientY: number): string | null {
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((clientX - rect.left) / rect.width) * 2 - 1,
      -((clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    const hits = this.raycaster.intersectObjects([...this.meshes.values()]);
    return hits.length ? (hits[0].object.userData.key as string) : null;
  }

  frame(): void {
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  }
}
