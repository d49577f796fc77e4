import itertools, math
import numpy as np
def opn2(m):
    f=(abs(m)**2).sum(); d=abs(np.linalg.det(m))
    return math.sqrt((f+math.sqrt(max(f*f-4*d*d,0)))/2)
A=[-1,-0.5,0,0.5,1]; D=[0.5,1,1.5]; O=[-0.5,-0.25,0,0.25,0.5]
best=(-1,None); n=0; skipped=0
for s1,s2,s3 in itertools.product(D,O,D):
    tr=s1+s3; det=s1*s3-s2*s2
    lmin=tr/2-math.sqrt((s1-s3)**2/4+s2*s2)
    if lmin<0.25: continue
    s=np.array([[s1,s2],[s2,s3]]); b=s@s
    for a4 in itertools.product(A,repeat=4):
        if all(v==0 for v in a4): continue
        a=np.array(a4).reshape(2,2)
        n+=1
        den=opn2(a@b-b@a)
        if den<1e-12: skipped+=1; continue
        r=opn2(a@s-s@a)/math.sqrt(den)/math.sqrt(opn2(a))
        if r>best[0]: best=(r,(a4,(s1,s2,s3)))
print(n,skipped,repr(best[0]),best[1])
